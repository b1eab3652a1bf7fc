#include "support.hpp"

#include "personagraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pgtest {

Timestamp ts(std::string_view iso) {
    auto t = parse_timestamp(iso);
    if (!t) throw std::invalid_argument("bad test timestamp " + std::string(iso));
    return *t;
}

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "pgtest-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string fake_sha(std::string_view salt, std::uint64_t index) {
    // splitmix64 over an FNV-1a seed
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : salt) h = (h ^ c) * 1099511628211ull;
    h ^= index * 0x9e3779b97f4a7c15ull;
    std::string out;
    char buf[17];
    for (int i = 0; i < 3; ++i) {
        std::uint64_t z = (h += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
        out += buf;
    }
    return out.substr(0, 40);
}

GraphStore build_store(const Dataset& data, EnrichResult* enrich) {
    GraphStore store;
    for (const auto& r : data.repos) ingest_snapshot(r.snapshot, store);
    for (const auto& r : data.repos) ingest_commit_stream(r.snapshot.repository.key(), r.commits, store);
    auto e = enrich_all(store);
    if (enrich) *enrich = std::move(e);
    return store;
}

namespace {

struct Who {
    IdentityRecord id;
    std::optional<std::string> login; // set when commits carry the binding
};

/// Accumulates one repository's raw records and forge entities.
class RepoBuilder {
public:
    RepoBuilder(std::string owner, std::string name, std::uint64_t seed) : rng_(seed) {
        snap_.repository.owner = std::move(owner);
        snap_.repository.name = std::move(name);
        snap_.repository.owner_type = "Organization";
        snap_.repository.default_branch = "master";
    }

    RepoSnapshot& snapshot() { return snap_; }
    std::mt19937_64& rng() { return rng_; }

    void user(const std::string& login, std::optional<Timestamp> created, std::vector<std::string> orgs = {}) {
        users_[login] = {created, std::move(orgs)};
    }

    /// `count` commits by `who` spanning exactly [first, last].
    void commits(const Who& who, int count, Timestamp first, Timestamp last) {
        const auto span = (last - first).count();
        for (int i = 0; i < count; ++i) {
            Timestamp at = first;
            if (i == count - 1 && count > 1) at = last;
            else if (i > 0) at = first + Duration(std::uniform_int_distribution<std::int64_t>(1, std::max<std::int64_t>(1, span - 1))(rng_));
            add_commit(who, at, who, at + Duration(std::uniform_int_distribution<std::int64_t>(0, 3 * 86400)(rng_)));
        }
    }

    void add_commit(const Who& author, Timestamp authored, const Who& committer, Timestamp committed) {
        raw_.push_back({author, authored, committer, committed});
    }

    int pr(const std::optional<std::string>& author, const std::optional<std::string>& merger,
           std::optional<Timestamp> merged_at, std::vector<std::pair<std::optional<std::string>, std::string>> reviews = {},
           std::string base = "master") {
        PullRequest p;
        p.number = ++next_number_;
        p.id = "PR_" + snap_.repository.name + "_" + std::to_string(p.number);
        p.author_login = author;
        p.created_at = merged_at ? *merged_at - Duration(86400 * 2) : Timestamp{} + Duration(1'600'000'000);
        p.merged_at = merged_at;
        p.merged_by_login = merged_at ? merger : std::nullopt;
        p.base_ref = std::move(base);
        int k = 0;
        for (auto& [login, state] : reviews) {
            Review r;
            r.id = "PRR_" + snap_.repository.name + "_" + std::to_string(p.number) + "_" + std::to_string(++k);
            r.author_login = login;
            r.submitted_at = p.created_at ? std::optional(*p.created_at + Duration(3600)) : std::nullopt;
            r.state = state;
            p.review_comments.push_back({"PRRC_" + r.id, login, r.submitted_at, r.id});
            p.reviews.push_back(std::move(r));
        }
        snap_.pull_requests.push_back(std::move(p));
        return next_number_;
    }

    int issue(const std::string& author, Timestamp at, std::vector<std::string> commenters, bool discussion = false) {
        Issue i;
        i.number = ++next_number_;
        i.id = (discussion ? "D_" : "I_") + snap_.repository.name + "_" + std::to_string(i.number);
        i.author_login = author;
        i.created_at = at;
        int k = 0;
        for (auto& c : commenters)
            i.comments.push_back({i.id + "_C" + std::to_string(++k), c, at + Duration(3600 * k)});
        i.content_edits.push_back({i.id + "_E", author, at + Duration(60)});
        (discussion ? snap_.discussions : snap_.issues).push_back(std::move(i));
        return next_number_;
    }

    void bind_email(const std::string& email, const std::string& login) { snap_.email_bindings.push_back({email, login}); }

    RepoFixture finish(Timestamp collected_at) {
        std::stable_sort(raw_.begin(), raw_.end(), [](const Raw& a, const Raw& b) { return a.authored < b.authored; });
        RepoFixture out;
        const auto salt = snap_.repository.key();
        std::vector<CommitRecord> records;
        for (std::size_t i = 0; i < raw_.size(); ++i) {
            const auto& r = raw_[i];
            CommitRecord c;
            c.sha = fake_sha(salt, i);
            c.author_name = r.author.id.name;
            c.author_email = r.author.id.email;
            c.authored_at = r.authored;
            c.committer_name = r.committer.id.name;
            c.committer_email = r.committer.id.email;
            c.committed_at = r.committed;
            if (i > 0) c.parent_shas.push_back(records.back().sha);
            records.push_back(c);
            snap_.commits.push_back({c.sha, c.authored_at, c.committed_at,
                                     {c.author_name, c.author_email, r.author.login},
                                     {c.committer_name, c.committer_email, r.committer.login}});
        }
        std::reverse(records.begin(), records.end());
        std::reverse(snap_.commits.begin(), snap_.commits.end());
        out.commits = std::move(records);

        std::sort(snap_.email_bindings.begin(), snap_.email_bindings.end(),
                  [](const EmailBinding& a, const EmailBinding& b) { return a.email < b.email; });
        snap_.collected_at = collected_at;
        std::map<std::string, std::set<std::string>> seen;
        for (const auto& c : snap_.commits)
            for (const auto* a : {&c.author, &c.committer})
                if (a->user_login) seen[*a->user_login].insert(normalize_email(a->email));
        for (const auto& login : referenced_logins(snap_)) {
            SnapshotUser u;
            u.login = login;
            if (auto it = users_.find(login); it != users_.end()) {
                u.created_at = it->second.first;
                u.organizations = it->second.second;
            }
            if (auto it = seen.find(login); it != seen.end()) u.emails_seen.assign(it->second.begin(), it->second.end());
            snap_.users.push_back(std::move(u));
        }
        out.snapshot = std::move(snap_);
        return out;
    }

private:
    struct Raw {
        Who author;
        Timestamp authored;
        Who committer;
        Timestamp committed;
    };
    std::mt19937_64 rng_;
    RepoSnapshot snap_;
    std::vector<Raw> raw_;
    std::map<std::string, std::pair<std::optional<Timestamp>, std::vector<std::string>>> users_;
    int next_number_ = 0;
};

Timestamp plus_fraction(Timestamp first, Timestamp repo_first, Timestamp repo_last, double fraction) {
    const auto span = static_cast<double>((repo_last - repo_first).count());
    return first + Duration(static_cast<std::int64_t>(std::llround(span * fraction)));
}

RepoFixture xz_fixture() {
    RepoBuilder b("tukaani-project", "xz", 0x7a75);
    b.snapshot().repository.created_at = ts("2021-12-14T09:00:00Z");
    b.snapshot().repository.owner_email = "contact@tukaani.example";

    const auto repo_first = ts("2007-12-08T14:20:00Z");
    const auto repo_last = ts("2025-03-19T11:05:00Z");
    const std::string persona(kPersonaLogin);
    const std::string maint = "xz-maint";

    const Who m{{"Primary Maintainer", "maintainer@tukaani.example"}, maint};
    const Who j1{{"jiat75", std::string(kPersonaEmail)}, persona};
    const Who j2{{"Jia Tan", std::string(kPersonaEmail)}, persona};
    const Who j3{{"Jia Cheong Tan", std::string(kPersonaEmail)}, persona};

    b.user(persona, ts("2021-01-26T06:05:11Z"));
    b.user(maint, ts("2011-04-02T10:00:00Z"), {"tukaani-project"});

    // Persona: 496 commits over 12.47% of the history. The first was
    // authored in January but only committed in July.
    const auto jia_first = ts("2022-01-26T10:00:00Z");
    const auto jia_last = plus_fraction(jia_first, repo_first, repo_last, 0.1247);
    b.add_commit(j3, jia_first, m, ts("2022-07-01T08:00:00Z"));
    b.add_commit(j1, jia_last, j1, jia_last);
    const Who* variants[] = {&j1, &j2, &j3};
    for (int i = 0; i < 494; ++i) {
        const auto at = jia_first + Duration(std::uniform_int_distribution<std::int64_t>(1, (jia_last - jia_first).count() - 1)(b.rng()));
        b.add_commit(*variants[i % 3], at, *variants[i % 3], at + Duration(600));
    }

    b.commits(m, 2166, repo_first, repo_last);
    const int minor[] = {60, 45, 30, 22, 15, 8};
    for (int i = 0; i < 6; ++i) {
        const std::string login = "xz-contrib-" + std::to_string(i + 1);
        b.user(login, ts("2012-01-01T00:00:00Z") + Duration(86400LL * 200 * i));
        const Who w{{"Contributor " + std::to_string(i + 1), login + "@mail.example"}, login};
        const auto first = repo_first + Duration(86400LL * 365 * (i + 1));
        b.commits(w, minor[i], first, first + Duration(86400LL * 700));
    }
    b.commits(Who{{"Drive-by Patcher", "patch@drive-by.example"}, std::nullopt}, 12, ts("2015-05-05T05:05:05Z"),
              ts("2019-09-09T09:09:09Z"));

    // 24 qualifying self-merges, the first in December 2022.
    const auto first_merge = ts("2022-12-05T15:30:00Z");
    for (int i = 0; i < 24; ++i) {
        std::vector<std::pair<std::optional<std::string>, std::string>> reviews;
        if (i == 3) reviews.push_back({persona, "COMMENTED"}); // self-review only
        b.pr(persona, persona, first_merge + Duration(86400LL * 13 * i), reviews);
    }
    // Persona PRs that do not qualify.
    b.pr(persona, maint, ts("2022-06-10T12:00:00Z"));
    b.pr(persona, maint, ts("2022-09-01T12:00:00Z"), {{maint, "APPROVED"}});
    b.pr(persona, persona, ts("2022-11-20T12:00:00Z"), {{maint, "APPROVED"}});
    b.pr(persona, persona, ts("2022-11-25T12:00:00Z"), {{maint, "COMMENTED"}});
    b.pr(persona, persona, ts("2022-11-28T12:00:00Z"), {{std::nullopt, "CHANGES_REQUESTED"}});
    b.pr(persona, std::nullopt, std::nullopt);
    // The maintainer self-merges too, but started long before the window.
    for (int i = 0; i < 10; ++i) b.pr(maint, maint, ts("2023-02-01T00:00:00Z") + Duration(86400LL * 30 * i));
    for (int i = 0; i < 6; ++i)
        b.pr("xz-contrib-" + std::to_string(i + 1), maint, ts("2022-03-01T00:00:00Z") + Duration(86400LL * 40 * i));

    b.issue(persona, ts("2022-05-01T10:00:00Z"), {maint, persona});
    b.issue("xz-contrib-2", ts("2023-03-03T10:00:00Z"), {persona});
    b.issue(maint, ts("2023-08-08T10:00:00Z"), {"xz-contrib-4"}, true);

    auto fx = b.finish(ts("2025-03-27T00:00:00Z"));
    // a comment on the persona's first commit
    const auto& first_jia = *std::find_if(fx.commits.begin(), fx.commits.end(),
                                          [&](const CommitRecord& c) { return c.authored_at == jia_first; });
    fx.snapshot.commit_comments.push_back({"CC_xz_1", first_jia.sha, maint, ts("2022-07-02T09:00:00Z")});
    return fx;
}

RepoFixture pcre2_fixture() {
    RepoBuilder b("PCRE2Project", "pcre2", 0x9c2e);
    b.snapshot().repository.created_at = ts("2021-05-27T12:00:00Z");

    const auto repo_first = ts("2014-09-25T08:00:00Z");
    const auto repo_last = ts("2025-03-20T16:45:00Z");
    const std::string maint = "pcre-maint";
    const std::string a(kPlantedA);
    const std::string bb(kPlantedB);

    b.user(maint, ts("2013-03-03T03:03:03Z"), {"PCRE2Project"});
    b.user(a, ts("2019-06-01T00:00:00Z"));
    b.user(bb, ts("2020-02-02T00:00:00Z"));

    const Who m{{"PCRE Maintainer", "maint@pcre.example"}, maint};
    b.commits(m, 1715, repo_first, repo_last);

    // A: 139 commits over 4.66% of the history from two addresses; the
    // second is bound only by an explicit lookup.
    const auto a_first = ts("2024-08-29T09:00:00Z");
    const auto a_last = plus_fraction(a_first, repo_first, repo_last, 0.0466);
    const Who a1{{"Newcomer A", "newcomer.a@bigcorp.example"}, a};
    const Who a2{{"newcomer-a", "Newcomer.A@users.noreply.example"}, std::nullopt};
    b.add_commit(a1, a_first, a1, a_first);
    b.add_commit(a2, a_last, a2, a_last);
    for (int i = 0; i < 137; ++i) {
        const auto at = a_first + Duration(std::uniform_int_distribution<std::int64_t>(1, (a_last - a_first).count() - 1)(b.rng()));
        const Who& w = i % 4 == 0 ? a2 : a1;
        b.add_commit(w, at, w, at);
    }
    b.bind_email("newcomer.a@users.noreply.example", a);

    // B: recent linked identity plus an older unlinked one.
    const auto b_first = ts("2022-07-11T12:00:00Z");
    b.commits(Who{{"Returning B", "b@bigcorp.example"}, bb}, 40, b_first, ts("2023-09-01T12:00:00Z"));
    b.commits(Who{{"B Old", "b-old@legacy.example"}, std::nullopt}, 25, ts("2015-01-10T00:00:00Z"), ts("2018-06-30T00:00:00Z"));

    const int minor[] = {50, 30, 12};
    for (int i = 0; i < 3; ++i) {
        const std::string login = "pcre-contrib-" + std::to_string(i + 1);
        b.user(login, ts("2014-01-01T00:00:00Z"));
        const auto first = repo_first + Duration(86400LL * 500 * (i + 1));
        b.commits(Who{{"PCRE Contributor " + std::to_string(i + 1), login + "@mail.example"}, login}, minor[i], first,
                  first + Duration(86400LL * 400));
    }

    const auto a_merge = a_first + Duration(86400LL * 75);
    for (int i = 0; i < 43; ++i) b.pr(a, a, a_merge + Duration(86400LL * 2 * i), {}, i % 5 == 0 ? "release" : "master");
    const auto b_merge = b_first + Duration(86400LL * 220);
    for (int i = 0; i < 7; ++i) b.pr(bb, bb, b_merge + Duration(86400LL * 9 * i));
    b.pr(bb, maint, ts("2022-08-01T00:00:00Z"), {{maint, "APPROVED"}});
    for (int i = 0; i < 5; ++i) b.pr(maint, maint, ts("2024-01-01T00:00:00Z") + Duration(86400LL * 20 * i));

    b.issue(a, ts("2024-10-01T00:00:00Z"), {maint}, true);
    return b.finish(ts("2025-03-27T00:00:00Z"));
}

} // namespace

Dataset replica_dataset() {
    Dataset d;
    d.repos.push_back(xz_fixture());
    d.repos.push_back(pcre2_fixture());
    d.analysis_date = ts("2025-03-27T00:00:00Z");
    return d;
}

Dataset random_dataset(std::uint64_t seed, const RandomLimits& limits) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
    auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

    const std::string tag = "s" + std::to_string(seed);
    const int n_users = static_cast<int>(uniform(1, limits.max_users));

    struct UserPlan {
        std::string login;
        std::vector<Who> identities;
        std::vector<bool> via_binding; // bound by explicit lookup instead of commits
        Timestamp created;
    };
    std::vector<UserPlan> users;
    static const char* domains[] = {"mail.example", "corp.example", "Users.Noreply.example"};
    for (int i = 0; i < n_users; ++i) {
        UserPlan u;
        u.login = "ghuser-" + tag + "-" + std::to_string(i) + "q";
        u.created = from_unix_seconds(uniform(1'200'000'000, 1'650'000'000));
        const int n_ids = static_cast<int>(uniform(1, 3));
        for (int k = 0; k < n_ids; ++k) {
            std::string local = "dev" + std::to_string(i) + "x" + std::to_string(k % 2) + "." + tag;
            std::string email = local + "@" + domains[uniform(0, 2)];
            if (k == 2) email = " " + email; // same address again, padded
            if (chance(0.3)) std::transform(email.begin(), email.end(), email.begin(), ::toupper);
            const std::string name = k == 0 ? "Dev " + std::to_string(i) : "dev" + std::to_string(i) + " alt" + std::to_string(k);
            const bool by_lookup = chance(0.2);
            const bool unbound = !by_lookup && chance(0.1);
            u.identities.push_back(Who{{name, email}, by_lookup || unbound ? std::nullopt : std::optional(u.login)});
            u.via_binding.push_back(by_lookup);
        }
        users.push_back(std::move(u));
    }
    // Unbound emails must stay unbound everywhere: an address bound through
    // one identity links every identity with that address.
    std::set<std::string> bound;
    for (const auto& u : users)
        for (std::size_t k = 0; k < u.identities.size(); ++k)
            if (u.identities[k].login || u.via_binding[k]) bound.insert(normalize_email(u.identities[k].id.email));
    for (auto& u : users)
        for (std::size_t k = 0; k < u.identities.size(); ++k)
            if (bound.contains(normalize_email(u.identities[k].id.email)) && !u.via_binding[k] && !u.identities[k].login)
                u.via_binding[k] = true;

    std::vector<Who> ghosts;
    for (int i = 0, n = static_cast<int>(uniform(0, 5)); i < n; ++i)
        ghosts.push_back(Who{{"Ghost " + std::to_string(i), "ghost" + std::to_string(i) + "." + tag + "@nowhere.example"}, std::nullopt});

    Dataset d;
    const int n_repos = static_cast<int>(uniform(1, limits.max_repos));
    Timestamp latest{};
    static const char* states[] = {"APPROVED", "COMMENTED", "CHANGES_REQUESTED", "DISMISSED"};
    for (int r = 0; r < n_repos; ++r) {
        RepoBuilder b("rnd-org-" + tag, "repo" + std::to_string(r), seed * 31 + r);
        const auto start = from_unix_seconds(uniform(1'262'304'000, 1'640'000'000));
        const bool degenerate = chance(0.05);
        const auto end = degenerate ? start : start + Duration(uniform(86400, 86400LL * 365 * 8));
        latest = std::max(latest, end);

        std::vector<int> active;
        for (int i = 0; i < n_users; ++i)
            if (chance(0.7)) active.push_back(i);
        if (active.empty()) active.push_back(0);

        for (int i : active) b.user(users[i].login, users[i].created);
        for (int i : active)
            for (std::size_t k = 0; k < users[i].identities.size(); ++k)
                if (users[i].via_binding[k] && chance(0.8))
                    b.bind_email(users[i].identities[k].id.email, users[i].login);

        const int n_commits = static_cast<int>(uniform(1, limits.max_commits));
        // Each active user gets a personal window so presences vary.
        std::map<int, std::pair<Timestamp, Timestamp>> window;
        for (int i : active) {
            const auto span = (end - start).count();
            const auto a = start + Duration(span ? uniform(0, span) : 0);
            const auto rest = (end - a).count();
            window[i] = {a, a + Duration(rest ? uniform(0, rest) : 0)};
        }
        for (int c = 0; c < n_commits; ++c) {
            const Who* who;
            Timestamp at;
            if (!ghosts.empty() && chance(0.1)) {
                who = &ghosts[uniform(0, static_cast<std::int64_t>(ghosts.size()) - 1)];
                at = start + Duration((end - start).count() ? uniform(0, (end - start).count()) : 0);
            } else {
                // skewed pick so some users dominate
                const auto idx = static_cast<std::size_t>(std::min<std::int64_t>(
                    uniform(0, static_cast<std::int64_t>(active.size()) - 1), uniform(0, static_cast<std::int64_t>(active.size()) - 1)));
                const auto& u = users[active[idx]];
                who = &u.identities[uniform(0, static_cast<std::int64_t>(u.identities.size()) - 1)];
                const auto [a, z] = window[active[idx]];
                at = a + Duration((z - a).count() ? uniform(0, (z - a).count()) : 0);
            }
            // Login-bearing actors must only carry logins of users present
            // in this snapshot.
            b.add_commit(*who, at, *who, at + Duration(uniform(0, 86400 * 20)));
        }

        const int n_prs = static_cast<int>(uniform(0, limits.max_prs));
        for (int p = 0; p < n_prs; ++p) {
            const auto& author = users[active[uniform(0, static_cast<std::int64_t>(active.size()) - 1)]].login;
            const bool merged = chance(0.75);
            std::optional<std::string> merger;
            if (merged) {
                const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
                if (roll < 0.6) merger = author;
                else if (roll < 0.9) merger = users[active[uniform(0, static_cast<std::int64_t>(active.size()) - 1)]].login;
            }
            const auto merged_at = start + Duration(uniform(-86400LL * 200, (end - start).count() + 86400LL * 400));
            std::vector<std::pair<std::optional<std::string>, std::string>> reviews;
            for (int k = 0, n = static_cast<int>(uniform(0, 3)); k < n; ++k) {
                const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
                std::optional<std::string> reviewer;
                if (roll < 0.4) reviewer = author;
                else if (roll < 0.9) reviewer = users[active[uniform(0, static_cast<std::int64_t>(active.size()) - 1)]].login;
                reviews.push_back({reviewer, states[uniform(0, 3)]});
            }
            b.pr(author, merger, merged ? std::optional(merged_at) : std::nullopt, reviews, chance(0.8) ? "main" : "dev");
        }
        if (chance(0.5)) {
            const auto& login = users[active.front()].login;
            b.issue(login, start + Duration(3600), {login});
        }
        d.repos.push_back(b.finish(end + Duration(86400)));
    }
    d.analysis_date = latest + Duration(uniform(0, 86400LL * 365 * 3));
    return d;
}

} // namespace pgtest
