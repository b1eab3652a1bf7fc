#include "personagraph/report.hpp"

#include "personagraph/error.hpp"

#include <cstdio>
#include <map>
#include <sstream>

namespace personagraph {

using nlohmann::json;

namespace {

std::string ts_or_empty(const std::optional<Timestamp>& t) { return t ? format_timestamp(*t) : std::string(); }

std::string pct(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string_view policy_name(ReviewPolicy p) { return p == ReviewPolicy::ApprovedOnly ? "approved" : "any"; }

} // namespace

Report build_report(const GraphStore& store, const DetectorParams& params, const std::vector<BindingConflict>& warnings) {
    params.validate();
    Report r;
    r.analysis_date = format_timestamp(*params.analysis_date);
    r.params = {params.max_contributor_age_months, params.lookback_years, params.min_share_pct, params.max_presence_pct,
                std::string(policy_name(params.review_policy)), format_timestamp(params.lookback_cutoff())};

    auto& d = r.dataset;
    d.repositories = repository_keys(store);
    d.github_users = static_cast<std::int64_t>(store.count(NodeLabel::GithubUser));
    d.pull_requests = static_cast<std::int64_t>(store.count(NodeLabel::GithubPullRequest));
    d.git_commits = static_cast<std::int64_t>(store.count(NodeLabel::GitCommit));
    d.git_identities = static_cast<std::int64_t>(store.count(NodeLabel::GitIdentity));
    for (auto id : store.nodes_with_label(NodeLabel::GitIdentity))
        if (!store.out_neighbors(id, RelType::LINKED_TO_GITHUB_USER).empty()) ++d.linked_identities;
    for (const auto& repo : d.repositories) {
        d.unlinked_commits += unlinked_commit_count(store, repo);
        d.stats_rows += static_cast<std::int64_t>(contributor_stats(store, repo).size());
    }

    for (const auto& f : detect_self_merge(store, params)) {
        r.self_merge.push_back({f.user_login, f.repository_key, f.contributor_age_months, f.self_merge_count,
                                format_timestamp(f.first_self_merge_at), f.first_self_merge_pr, f.target_branch,
                                format_timestamp(f.stats.user_first_authored_at), ts_or_empty(f.user_created_at),
                                f.emails});
    }
    for (const auto& f : detect_share_presence(store, params)) {
        r.share_presence.push_back({f.user_login, f.repository_key, f.commit_share_pct, f.presence_pct,
                                    f.stats.user_commit_count, f.stats.repo_commit_count,
                                    format_timestamp(f.stats.user_first_authored_at),
                                    format_timestamp(f.stats.user_last_authored_at), ts_or_empty(f.user_created_at),
                                    f.emails});
    }
    r.warnings = warnings;
    return r;
}

std::string pseudonym(std::size_t index) {
    std::string letters;
    std::size_t n = index + 1; // bijective base 26
    while (n > 0) {
        --n;
        letters.insert(letters.begin(), static_cast<char>('A' + n % 26));
        n /= 26;
    }
    return "Contributor " + letters;
}

Report anonymize(const Report& report, const std::set<std::string>& allowlist) {
    Report out = report;
    std::map<std::string, std::string> names;
    std::set<std::string> redacted;
    auto map_login = [&](const std::string& login) -> std::string {
        if (allowlist.contains(login)) return login;
        auto it = names.find(login);
        if (it == names.end()) it = names.emplace(login, pseudonym(names.size())).first;
        return it->second;
    };
    auto note_emails = [&](const std::string& login, const std::vector<std::string>& emails) {
        if (!allowlist.contains(login)) redacted.insert(emails.begin(), emails.end());
    };

    // Assign pseudonyms in appearance order before touching any email.
    for (const auto& row : report.self_merge) map_login(row.name), note_emails(row.name, row.emails);
    for (const auto& row : report.share_presence) map_login(row.name), note_emails(row.name, row.emails);
    for (const auto& w : report.warnings) {
        map_login(w.kept_login);
        map_login(w.rejected_login);
        if (!allowlist.contains(w.kept_login) || !allowlist.contains(w.rejected_login)) redacted.insert(w.email);
    }

    auto scrub = [&](std::vector<std::string>& emails) {
        for (auto& e : emails)
            if (redacted.contains(e)) e = std::string(kRedacted);
    };
    for (auto& row : out.self_merge) row.name = map_login(row.name), scrub(row.emails);
    for (auto& row : out.share_presence) row.name = map_login(row.name), scrub(row.emails);
    for (auto& w : out.warnings) {
        w.kept_login = map_login(w.kept_login);
        w.rejected_login = map_login(w.rejected_login);
        if (redacted.contains(w.email)) w.email = std::string(kRedacted);
    }
    out.anonymized = true;
    return out;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept {
    if (text == "markdown") return ReportFormat::Markdown;
    if (text == "csv") return ReportFormat::Csv;
    if (text == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::string_view to_string(ReportFormat format) noexcept {
    switch (format) {
    case ReportFormat::Markdown: return "markdown";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    }
    return "?";
}

// ---- json ----

json report_to_json(const Report& r) {
    json j;
    j["analysis_date"] = r.analysis_date;
    j["anonymized"] = r.anonymized;
    j["params"] = {{"max_contributor_age_months", r.params.max_contributor_age_months},
                   {"lookback_years", r.params.lookback_years},
                   {"min_share_pct", r.params.min_share_pct},
                   {"max_presence_pct", r.params.max_presence_pct},
                   {"review_policy", r.params.review_policy},
                   {"lookback_cutoff", r.params.lookback_cutoff}};
    const auto& d = r.dataset;
    j["dataset"] = {{"repositories", d.repositories},       {"github_users", d.github_users},
                    {"pull_requests", d.pull_requests},     {"git_commits", d.git_commits},
                    {"git_identities", d.git_identities},   {"linked_identities", d.linked_identities},
                    {"unlinked_commits", d.unlinked_commits}, {"stats_rows", d.stats_rows}};
    j["self_merge"] = json::array();
    for (const auto& s : r.self_merge)
        j["self_merge"].push_back({{"name", s.name},
                                   {"repository", s.repository},
                                   {"contributor_age_months", s.contributor_age_months},
                                   {"self_merged_prs", s.self_merged_prs},
                                   {"first_self_merge_at", s.first_self_merge_at},
                                   {"first_self_merge_pr", s.first_self_merge_pr},
                                   {"target_branch", s.target_branch},
                                   {"first_authored_at", s.first_authored_at},
                                   {"user_created_at", s.user_created_at},
                                   {"emails", s.emails}});
    j["share_presence"] = json::array();
    for (const auto& s : r.share_presence)
        j["share_presence"].push_back({{"name", s.name},
                                       {"repository", s.repository},
                                       {"authored_pct", s.authored_pct},
                                       {"presence_pct", s.presence_pct},
                                       {"user_commits", s.user_commits},
                                       {"repo_commits", s.repo_commits},
                                       {"first_authored_at", s.first_authored_at},
                                       {"last_authored_at", s.last_authored_at},
                                       {"user_created_at", s.user_created_at},
                                       {"emails", s.emails}});
    j["warnings"] = json::array();
    for (const auto& w : r.warnings)
        j["warnings"].push_back(
            {{"kind", "binding_conflict"}, {"email", w.email}, {"kept_login", w.kept_login}, {"rejected_login", w.rejected_login}});
    return j;
}

Report report_from_json(const json& j) {
    try {
        Report r;
        r.analysis_date = j.at("analysis_date").get<std::string>();
        r.anonymized = j.value("anonymized", false);
        const auto& p = j.at("params");
        r.params = {p.at("max_contributor_age_months").get<std::int64_t>(), p.at("lookback_years").get<int>(),
                    p.at("min_share_pct").get<double>(),                 p.at("max_presence_pct").get<double>(),
                    p.at("review_policy").get<std::string>(),            p.at("lookback_cutoff").get<std::string>()};
        const auto& d = j.at("dataset");
        r.dataset = {d.at("repositories").get<std::vector<std::string>>(),
                     d.at("github_users").get<std::int64_t>(),
                     d.at("pull_requests").get<std::int64_t>(),
                     d.at("git_commits").get<std::int64_t>(),
                     d.at("git_identities").get<std::int64_t>(),
                     d.at("linked_identities").get<std::int64_t>(),
                     d.at("unlinked_commits").get<std::int64_t>(),
                     d.at("stats_rows").get<std::int64_t>()};
        for (const auto& s : j.at("self_merge"))
            r.self_merge.push_back({s.at("name"), s.at("repository"), s.at("contributor_age_months"),
                                    s.at("self_merged_prs"), s.at("first_self_merge_at"), s.at("first_self_merge_pr"),
                                    s.at("target_branch"), s.at("first_authored_at"), s.at("user_created_at"),
                                    s.at("emails").get<std::vector<std::string>>()});
        for (const auto& s : j.at("share_presence"))
            r.share_presence.push_back({s.at("name"), s.at("repository"), s.at("authored_pct"), s.at("presence_pct"),
                                        s.at("user_commits"), s.at("repo_commits"), s.at("first_authored_at"),
                                        s.at("last_authored_at"), s.at("user_created_at"),
                                        s.at("emails").get<std::vector<std::string>>()});
        for (const auto& w : j.at("warnings"))
            r.warnings.push_back({w.at("email"), w.at("kept_login"), w.at("rejected_login")});
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("report document: ") + e.what());
    }
}

// ---- text renderers ----

namespace {

std::string md_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n' || c == '\r') out += ' ';
        else out += c;
    }
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

void md_row(std::ostringstream& o, const std::vector<std::string>& cells) {
    o << '|';
    for (const auto& c : cells) o << ' ' << md_cell(c) << " |";
    o << '\n';
}

void md_table(std::ostringstream& o, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    md_row(o, header);
    o << '|';
    for (std::size_t i = 0; i < header.size(); ++i) o << " --- |";
    o << '\n';
    for (const auto& r : rows) md_row(o, r);
}

std::string or_dash(const std::string& s) { return s.empty() ? "-" : s; }

std::string render_markdown(const Report& r) {
    std::ostringstream o;
    const auto& p = r.params;
    const auto& d = r.dataset;
    o << "# Contributor anomaly report\n\n";
    o << "- Analysis date: " << r.analysis_date << '\n';
    o << "- First authored commit on or after: " << p.lookback_cutoff << " (" << p.lookback_years << " years)\n";
    o << "- Self-merge: contributor age below " << p.max_contributor_age_months << " months, review policy "
      << p.review_policy << '\n';
    o << "- Share vs presence: authored > " << pct(p.min_share_pct) << "%, presence < " << pct(p.max_presence_pct)
      << "%\n";
    o << "- Repositories (" << d.repositories.size() << "): " << (d.repositories.empty() ? "-" : join(d.repositories, ", "))
      << '\n';
    o << "- Users: " << d.github_users << ", pull requests: " << d.pull_requests << ", git commits: " << d.git_commits
      << ", unlinked commits: " << d.unlinked_commits << '\n';
    o << "- Git identities: " << d.git_identities << " (" << d.linked_identities << " linked), stats rows: "
      << d.stats_rows << '\n';
    if (r.anonymized) o << "- Contributor names are anonymized\n";

    o << "\n## Unreviewed self-merged pull requests\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : r.self_merge)
        rows.push_back({s.name, s.repository, std::to_string(s.contributor_age_months), std::to_string(s.self_merged_prs),
                        s.first_self_merge_at, or_dash(s.target_branch), s.first_authored_at, or_dash(s.user_created_at),
                        or_dash(join(s.emails, ", "))});
    md_table(o,
             {"Name", "Repository", "Contributor age (months)", "Unreviewed self-merged PRs", "First self-merge",
              "Target branch", "First authored", "Account created", "Emails"},
             rows);

    o << "\n## Significant contribution relative to presence\n\n";
    rows.clear();
    for (const auto& s : r.share_presence)
        rows.push_back({s.name, s.repository, pct(s.authored_pct), pct(s.presence_pct),
                        std::to_string(s.user_commits) + "/" + std::to_string(s.repo_commits), s.first_authored_at,
                        s.last_authored_at, or_dash(s.user_created_at), or_dash(join(s.emails, ", "))});
    md_table(o,
             {"Name", "Repository", "% Authored", "% Presence", "Commits", "First authored", "Last authored",
              "Account created", "Emails"},
             rows);

    if (!r.warnings.empty()) {
        o << "\n## Warnings\n\n";
        for (const auto& w : r.warnings)
            o << "- conflicting bindings for " << w.email << ": kept " << w.kept_login << ", ignored "
              << w.rejected_login << '\n';
    }
    return o.str();
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

void csv_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    out += "\r\n";
}

std::string render_csv(const Report& r) {
    std::string out;
    csv_row(out, {"table", "name", "repository", "contributor_age_months", "self_merged_prs", "first_self_merge_at",
                  "first_self_merge_pr", "target_branch", "authored_pct", "presence_pct", "user_commits",
                  "repo_commits", "first_authored_at", "last_authored_at", "user_created_at", "emails"});
    for (const auto& s : r.self_merge)
        csv_row(out, {"self_merge", s.name, s.repository, std::to_string(s.contributor_age_months),
                      std::to_string(s.self_merged_prs), s.first_self_merge_at, s.first_self_merge_pr, s.target_branch,
                      "", "", "", "", s.first_authored_at, "", s.user_created_at, join(s.emails, ";")});
    for (const auto& s : r.share_presence)
        csv_row(out, {"share_presence", s.name, s.repository, "", "", "", "", "", pct(s.authored_pct),
                      pct(s.presence_pct), std::to_string(s.user_commits), std::to_string(s.repo_commits),
                      s.first_authored_at, s.last_authored_at, s.user_created_at, join(s.emails, ";")});
    return out;
}

} // namespace

std::string render(const Report& report, ReportFormat format) {
    switch (format) {
    case ReportFormat::Markdown: return render_markdown(report);
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Json: return report_to_json(report).dump(2) + "\n";
    }
    return {};
}

} // namespace personagraph
