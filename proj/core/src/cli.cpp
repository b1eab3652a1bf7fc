#include "personagraph/cli.hpp"

#include "personagraph/collector.hpp"
#include "personagraph/error.hpp"
#include "personagraph/git_extract.hpp"
#include "personagraph/ingest.hpp"
#include "text.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

namespace personagraph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

ReviewPolicy parse_policy(const std::string& text) {
    if (text == "any") return ReviewPolicy::AnyReview;
    if (text == "approved") return ReviewPolicy::ApprovedOnly;
    config_error("review policy must be 'any' or 'approved', got '" + text + "'");
}

ReportFormat parse_format(const std::string& text) {
    auto f = parse_report_format(text);
    if (!f) config_error("format must be markdown, csv or json, got '" + text + "'");
    return *f;
}

template <class T>
T field(const json& obj, const char* key, const char* what) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        config_error(std::string("config field '") + key + "' must be " + what);
    }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [k, v] : obj.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end())
            config_error("unknown config field '" + k + "' in " + std::string(where));
    }
}

RepositoryInput parse_repo_spec(const std::string& spec) {
    // owner/name[,snapshot=PATH][,clone=PATH][,commits=PATH]
    std::vector<std::string> parts;
    for (auto p : detail::split(spec, ',')) parts.emplace_back(p);
    RepositoryInput in;
    in.repository = parts.at(0);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) config_error("bad --repo component '" + parts[i] + "'");
        const auto key = parts[i].substr(0, eq);
        fs::path value = parts[i].substr(eq + 1);
        if (key == "snapshot") in.snapshot = value;
        else if (key == "clone") in.clone = value;
        else if (key == "commits") in.commits = value;
        else config_error("bad --repo component '" + parts[i] + "'");
    }
    split_repository(in.repository);
    return in;
}

Timestamp now_seconds() {
    return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

} // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) config_error("config must be a JSON object");
    reject_unknown(j,
                   {"repositories", "params", "format", "anonymize", "allowlist", "store", "offline_replay", "output",
                    "budget_points", "batch_size", "resolve_emails", "collected_at"},
                   "config");
    RunConfig c;
    if (j.contains("repositories")) {
        const auto& repos = j.at("repositories");
        if (!repos.is_array()) config_error("config field 'repositories' must be an array");
        for (const auto& r : repos) {
            if (!r.is_object()) config_error("repository entries must be objects");
            reject_unknown(r, {"repository", "snapshot", "clone", "commits"}, "repository entry");
            RepositoryInput in;
            in.repository = field<std::string>(r, "repository", "owner/name");
            split_repository(in.repository);
            if (r.contains("snapshot")) in.snapshot = resolve(base, field<std::string>(r, "snapshot", "a path"));
            if (r.contains("clone")) in.clone = resolve(base, field<std::string>(r, "clone", "a path"));
            if (r.contains("commits")) in.commits = resolve(base, field<std::string>(r, "commits", "a path"));
            c.repositories.push_back(std::move(in));
        }
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        if (!p.is_object()) config_error("config field 'params' must be an object");
        reject_unknown(p, {"max_contributor_age_months", "lookback_years", "min_share_pct", "max_presence_pct", "review_policy"},
                       "params");
        if (p.contains("max_contributor_age_months"))
            c.params.max_contributor_age_months = field<std::int64_t>(p, "max_contributor_age_months", "an integer");
        if (p.contains("lookback_years")) c.params.lookback_years = field<int>(p, "lookback_years", "an integer");
        if (p.contains("min_share_pct")) c.params.min_share_pct = field<double>(p, "min_share_pct", "a number");
        if (p.contains("max_presence_pct")) c.params.max_presence_pct = field<double>(p, "max_presence_pct", "a number");
        if (p.contains("review_policy")) c.params.review_policy = parse_policy(field<std::string>(p, "review_policy", "a string"));
    }
    if (j.contains("format")) c.format = parse_format(field<std::string>(j, "format", "a string"));
    if (j.contains("anonymize")) c.anonymize = field<bool>(j, "anonymize", "a boolean");
    if (j.contains("allowlist")) {
        for (const auto& l : field<std::vector<std::string>>(j, "allowlist", "an array of logins")) c.allowlist.insert(l);
    }
    if (j.contains("store")) c.store = resolve(base, field<std::string>(j, "store", "a path"));
    if (j.contains("offline_replay")) c.offline_replay = resolve(base, field<std::string>(j, "offline_replay", "a path"));
    if (j.contains("output")) c.output = resolve(base, field<std::string>(j, "output", "a path"));
    if (j.contains("budget_points")) c.budget_points = field<std::int64_t>(j, "budget_points", "an integer");
    if (j.contains("batch_size")) c.batch_size = field<int>(j, "batch_size", "an integer");
    if (j.contains("resolve_emails")) c.resolve_emails = field<bool>(j, "resolve_emails", "a boolean");
    if (j.contains("collected_at")) {
        auto t = parse_timestamp(field<std::string>(j, "collected_at", "a timestamp"));
        if (!t) config_error("config field 'collected_at' is not a timestamp");
        c.collected_at = t;
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        config_error("config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

fs::path partial_state_path(const fs::path& snapshot) { return fs::path(snapshot.string() + ".partial.json"); }

namespace {

struct Flags {
    std::string config;
    std::string as_of;
    std::string format;
    bool anonymize = false;
    std::vector<std::string> allow;
    std::string store;
    std::string offline_replay;
    std::string output;
    std::vector<std::string> repos;
    std::optional<std::int64_t> max_age;
    std::optional<int> lookback;
    std::optional<double> min_share;
    std::optional<double> max_presence;
    std::string review_policy;
    std::optional<std::int64_t> budget;
    std::optional<int> batch_size;
    std::string input; // report command
};

RunConfig effective_config(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (!f.repos.empty()) {
        c.repositories.clear();
        for (const auto& r : f.repos) c.repositories.push_back(parse_repo_spec(r));
    }
    if (!f.as_of.empty()) {
        auto t = parse_timestamp(f.as_of);
        if (!t) config_error("--as-of is not an ISO 8601 timestamp: " + f.as_of);
        c.params.analysis_date = t;
    }
    if (!f.format.empty()) c.format = parse_format(f.format);
    if (f.anonymize) c.anonymize = true;
    c.allowlist.insert(f.allow.begin(), f.allow.end());
    if (!f.store.empty()) c.store = f.store;
    if (!f.offline_replay.empty()) c.offline_replay = f.offline_replay;
    if (!f.output.empty()) c.output = f.output;
    if (f.max_age) c.params.max_contributor_age_months = *f.max_age;
    if (f.lookback) c.params.lookback_years = *f.lookback;
    if (f.min_share) c.params.min_share_pct = *f.min_share;
    if (f.max_presence) c.params.max_presence_pct = *f.max_presence;
    if (!f.review_policy.empty()) c.params.review_policy = parse_policy(f.review_policy);
    if (f.budget) c.budget_points = *f.budget;
    if (f.batch_size) c.batch_size = *f.batch_size;
    return c;
}

void emit(const RunConfig& c, const std::string& bytes, std::ostream& out) {
    if (!c.output) {
        out << bytes;
        return;
    }
    std::ofstream f(*c.output, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::Input, "cannot write " + c.output->string());
    f << bytes;
    if (!f.flush()) throw Error(ErrorKind::Input, "cannot write " + c.output->string());
}

std::set<std::string> stream_emails(const RepositoryInput& r) {
    std::vector<CommitRecord> records;
    if (r.commits && fs::exists(*r.commits)) records = read_commit_stream_file(*r.commits);
    else if (r.clone) records = extract_commit_stream(*r.clone);
    std::set<std::string> emails;
    for (const auto& c : records) {
        emails.insert(c.author_email);
        emails.insert(c.committer_email);
    }
    return emails;
}

int cmd_collect(const RunConfig& c, const CliEnvironment& env, std::ostream& out, std::ostream& err) {
    if (c.repositories.empty()) config_error("no repositories configured");
    for (const auto& r : c.repositories)
        if (!r.snapshot) config_error("repository " + r.repository + " has no snapshot path");

    std::unique_ptr<Transport> transport;
    if (c.offline_replay) {
        transport = std::make_unique<ReplayTransport>(*c.offline_replay);
    } else {
        if (!env.forge_token || env.forge_token->empty())
            throw Error(ErrorKind::Auth, "FORGE_TOKEN is not set (use --offline-replay for recorded data)");
        transport = std::make_unique<HttpTransport>(*env.forge_token);
    }

    RateBudget budget(c.budget_points);
    PlanOptions options;
    options.batch_size = c.batch_size;
    const Timestamp collected_at = c.collected_at.value_or(now_seconds());

    for (const auto& r : c.repositories) {
        const auto partial = partial_state_path(*r.snapshot);
        CollectionPlan plan = fs::exists(partial) ? load_plan(partial) : plan_collection(r.repository, *transport, budget, options);
        if (plan.repository != r.repository)
            throw Error(ErrorKind::Input, partial.string() + " belongs to " + plan.repository);

        auto outcome = collect_repository(std::move(plan), *transport, budget, collected_at);
        if (auto* s = std::get_if<Suspended>(&outcome)) {
            save_plan(s->plan, partial);
            err << "collect: rate budget exhausted during " << r.repository << "; state saved to " << partial.string()
                << "\n";
            return kExitSuspended;
        }
        auto snapshot = std::get<RepoSnapshot>(std::move(outcome));
        if (c.resolve_emails && (r.clone || r.commits)) {
            auto resolution = resolve_emails_to_users(r.repository, stream_emails(r), bound_emails(snapshot), *transport,
                                                      budget, c.batch_size);
            for (const auto& e : resolution.errors) err << "collect: email lookup: " << e << "\n";
            apply_email_resolution(snapshot, resolution);
        }
        save_snapshot(snapshot, *r.snapshot);
        fs::remove(partial);
        out << "collected " << r.repository << " -> " << r.snapshot->string() << "\n";
    }
    return kExitOk;
}

int cmd_analyze(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (!c.params.analysis_date) config_error("analyze requires --as-of");
    c.params.validate();

    GraphStore store;
    if (c.repositories.empty()) {
        if (!c.store || !fs::exists(*c.store)) config_error("no repositories configured and no existing --store to analyze");
        store = load_graph(*c.store);
    } else {
        std::vector<std::string> missing;
        for (const auto& r : c.repositories) {
            if (!r.snapshot) missing.push_back(r.repository + ": no snapshot path");
            else if (!fs::exists(*r.snapshot)) missing.push_back(r.repository + ": snapshot " + r.snapshot->string());
            if (r.commits) {
                if (!fs::exists(*r.commits)) missing.push_back(r.repository + ": commit stream " + r.commits->string());
            } else if (r.clone) {
                if (!fs::exists(*r.clone)) missing.push_back(r.repository + ": clone " + r.clone->string());
            } else {
                missing.push_back(r.repository + ": no clone or commit stream");
            }
        }
        if (!missing.empty()) {
            for (const auto& m : missing) err << "analyze: missing input: " << m << "\n";
            return kExitInput;
        }
        for (const auto& r : c.repositories) ingest_snapshot(load_snapshot(*r.snapshot), store);
        for (const auto& r : c.repositories) {
            if (r.commits) {
                ingest_commit_stream(r.repository, read_commit_stream_file(*r.commits), store);
            } else {
                ingest_commit_stream(r.repository, extract_commit_stream(*r.clone), store);
                ingest_branches(r.repository, list_branches(*r.clone), store);
            }
        }
    }
    // Enrichment is idempotent, so a loaded store is enriched again to
    // recover its binding conflicts.
    const auto enrich = enrich_all(store);
    if (c.store && !c.repositories.empty()) save_graph(store, *c.store);

    auto report = build_report(store, c.params, enrich.conflicts);
    if (c.anonymize) report = anonymize(report, c.allowlist);
    emit(c, render(report, c.format), out);
    return kExitOk;
}

int cmd_report(const Flags& f, std::ostream& out) {
    RunConfig c = effective_config(f);
    std::ifstream in(f.input);
    if (!in) throw Error(ErrorKind::Input, "cannot read report " + f.input);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, f.input + ": " + e.what());
    }
    auto report = report_from_json(j);
    if (c.anonymize && !report.anonymized) report = anonymize(report, c.allowlist);
    emit(c, render(report, c.format), out);
    return kExitOk;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Run configuration (JSON)");
    cmd->add_option("--format", f.format, "markdown, csv or json");
    cmd->add_flag("--anonymize", f.anonymize, "Replace logins with pseudonyms");
    cmd->add_option("--allow", f.allow, "Login exempt from anonymization (repeatable)");
    cmd->add_option("--output", f.output, "Write the report here instead of standard output");
}

void add_run(CLI::App* cmd, Flags& f) {
    cmd->add_option("--repo", f.repos, "owner/name[,snapshot=PATH][,clone=PATH][,commits=PATH] (repeatable)");
    cmd->add_option("--store", f.store, "Graph store file");
    cmd->add_option("--offline-replay", f.offline_replay, "Directory of recorded API exchanges");
    cmd->add_option("--budget", f.budget, "Rate budget points for this run");
    cmd->add_option("--batch-size", f.batch_size, "Page size, 1..100");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliEnvironment& env) {
    CLI::App app{"Contributor persona anomaly analysis", "personagraph"};
    app.require_subcommand(1);
    Flags f;

    auto* collect = app.add_subcommand("collect", "Collect repository snapshots from the forge API");
    add_run(collect, f);
    collect->add_option("--config", f.config, "Run configuration (JSON)");

    auto* analyze = app.add_subcommand("analyze", "Ingest, enrich and run both detectors");
    add_common(analyze, f);
    add_run(analyze, f);
    analyze->add_option("--as-of", f.as_of, "Analysis date (ISO 8601, required)");
    analyze->add_option("--max-age-months", f.max_age);
    analyze->add_option("--lookback-years", f.lookback);
    analyze->add_option("--min-share", f.min_share);
    analyze->add_option("--max-presence", f.max_presence);
    analyze->add_option("--review-policy", f.review_policy, "any or approved");

    auto* report = app.add_subcommand("report", "Re-render a saved JSON report");
    add_common(report, f);
    report->add_option("input", f.input, "Report saved with --format json")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (report->parsed()) return cmd_report(f, out);
        const RunConfig c = effective_config(f);
        if (collect->parsed()) return cmd_collect(c, env, out, err);
        return cmd_analyze(c, out, err);
    } catch (const Error& e) {
        err << app.get_subcommands().front()->get_name() << ": " << to_string(e.kind()) << " error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
        return kExitInput;
    }
}

} // namespace personagraph
