#include "personagraph/snapshot.hpp"

#include "personagraph/error.hpp"

#include <fstream>
#include <iterator>
#include <set>

namespace personagraph {

using nlohmann::json;

namespace {

json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<Timestamp>& v) { return v ? json(format_timestamp(*v)) : json(nullptr); }

/// Field reader that reports the JSON path of whatever is missing.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    const json& at(const std::string& field) const {
        auto it = j_.find(field);
        if (it == j_.end()) fail(field, "missing required field");
        return *it;
    }

    std::string text(const std::string& field) const {
        const auto& v = at(field);
        if (!v.is_string()) fail(field, "expected a string");
        return v.get<std::string>();
    }

    std::optional<std::string> opt_text(const std::string& field) const {
        const auto& v = at(field);
        if (v.is_null()) return std::nullopt;
        if (!v.is_string()) fail(field, "expected a string or null");
        return v.get<std::string>();
    }

    std::int64_t integer(const std::string& field) const {
        const auto& v = at(field);
        if (!v.is_number_integer()) fail(field, "expected an integer");
        return v.get<std::int64_t>();
    }

    Timestamp time(const std::string& field) const {
        auto t = parse_timestamp(text(field));
        if (!t) fail(field, "invalid timestamp");
        return *t;
    }

    std::optional<Timestamp> opt_time(const std::string& field) const {
        auto s = opt_text(field);
        if (!s) return std::nullopt;
        auto t = parse_timestamp(*s);
        if (!t) fail(field, "invalid timestamp");
        return t;
    }

    std::vector<std::string> strings(const std::string& field) const {
        const auto& v = array(field);
        std::vector<std::string> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) fail(field + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back(v[i].get<std::string>());
        }
        return out;
    }

    const json& array(const std::string& field) const {
        const auto& v = at(field);
        if (!v.is_array()) fail(field, "expected an array");
        return v;
    }

    template <typename T, typename F>
    std::vector<T> list(const std::string& field, F&& read_one) const {
        const auto& arr = array(field);
        std::vector<T> out;
        out.reserve(arr.size());
        for (std::size_t i = 0; i < arr.size(); ++i)
            out.push_back(read_one(Reader(arr[i], child(field) + "[" + std::to_string(i) + "]")));
        return out;
    }

    Reader object(const std::string& field) const { return Reader(at(field), child(field)); }

    [[noreturn]] void fail(const std::string& field, const std::string& why) const {
        throw Error(ErrorKind::Parse, "snapshot field '" + child(field) + "': " + why);
    }

private:
    std::string child(const std::string& field) const {
        if (field.empty()) return path_;
        return path_.empty() ? field : path_ + "." + field;
    }

    const json& j_;
    std::string path_;
};

json edits_json(const std::vector<ContentEdit>& edits) {
    json a = json::array();
    for (const auto& e : edits) a.push_back({{"id", e.id}, {"editor_login", opt(e.editor_login)}, {"edited_at", opt(e.edited_at)}});
    return a;
}

json comments_json(const std::vector<Comment>& comments) {
    json a = json::array();
    for (const auto& c : comments)
        a.push_back({{"id", c.id}, {"author_login", opt(c.author_login)}, {"created_at", opt(c.created_at)}});
    return a;
}

json actor_json(const GitActor& a) {
    return {{"name", a.name}, {"email", a.email}, {"user_login", opt(a.user_login)}};
}

json issue_json(const Issue& i) {
    return {{"number", i.number},
            {"id", i.id},
            {"author_login", opt(i.author_login)},
            {"created_at", opt(i.created_at)},
            {"comments", comments_json(i.comments)},
            {"content_edits", edits_json(i.content_edits)}};
}

ContentEdit read_edit(const Reader& r) { return {r.text("id"), r.opt_text("editor_login"), r.opt_time("edited_at")}; }

Comment read_comment(const Reader& r) { return {r.text("id"), r.opt_text("author_login"), r.opt_time("created_at")}; }

GitActor read_actor(const Reader& r) { return {r.text("name"), r.text("email"), r.opt_text("user_login")}; }

Issue read_issue(const Reader& r) {
    Issue i;
    i.number = r.integer("number");
    i.id = r.text("id");
    i.author_login = r.opt_text("author_login");
    i.created_at = r.opt_time("created_at");
    i.comments = r.list<Comment>("comments", read_comment);
    i.content_edits = r.list<ContentEdit>("content_edits", read_edit);
    return i;
}

RepositoryMeta read_repository(const Reader& r) {
    RepositoryMeta m;
    m.owner = r.text("owner");
    m.name = r.text("name");
    m.created_at = r.opt_time("created_at");
    m.owner_type = r.text("owner_type");
    m.owner_email = r.opt_text("owner_email");
    m.default_branch = r.text("default_branch");
    return m;
}

} // namespace

json repository_to_json(const RepositoryMeta& m) {
    return {{"owner", m.owner},
            {"name", m.name},
            {"created_at", opt(m.created_at)},
            {"owner_type", m.owner_type},
            {"owner_email", opt(m.owner_email)},
            {"default_branch", m.default_branch}};
}

RepositoryMeta repository_from_json(const json& j) { return read_repository(Reader(j, "repository")); }

json snapshot_to_json(const RepoSnapshot& s) {
    json j;
    j["schema_version"] = s.schema_version;
    j["collected_at"] = format_timestamp(s.collected_at);
    j["repository"] = repository_to_json(s.repository);

    json prs = json::array();
    for (const auto& pr : s.pull_requests) {
        json reviews = json::array();
        for (const auto& rv : pr.reviews)
            reviews.push_back({{"id", rv.id},
                               {"author_login", opt(rv.author_login)},
                               {"submitted_at", opt(rv.submitted_at)},
                               {"state", rv.state}});
        json rcs = json::array();
        for (const auto& rc : pr.review_comments)
            rcs.push_back({{"id", rc.id},
                           {"author_login", opt(rc.author_login)},
                           {"created_at", opt(rc.created_at)},
                           {"review_id", opt(rc.review_id)}});
        prs.push_back({{"number", pr.number},
                       {"id", pr.id},
                       {"author_login", opt(pr.author_login)},
                       {"created_at", opt(pr.created_at)},
                       {"merged_by_login", opt(pr.merged_by_login)},
                       {"merged_at", opt(pr.merged_at)},
                       {"base_ref", pr.base_ref},
                       {"reviews", std::move(reviews)},
                       {"review_comments", std::move(rcs)},
                       {"content_edits", edits_json(pr.content_edits)}});
    }
    j["pull_requests"] = std::move(prs);

    json issues = json::array();
    for (const auto& i : s.issues) issues.push_back(issue_json(i));
    j["issues"] = std::move(issues);
    json discussions = json::array();
    for (const auto& d : s.discussions) discussions.push_back(issue_json(d));
    j["discussions"] = std::move(discussions);

    json commits = json::array();
    for (const auto& c : s.commits)
        commits.push_back({{"sha", c.sha},
                           {"authored_at", format_timestamp(c.authored_at)},
                           {"committed_at", format_timestamp(c.committed_at)},
                           {"author", actor_json(c.author)},
                           {"committer", actor_json(c.committer)}});
    j["commits"] = std::move(commits);

    json ccs = json::array();
    for (const auto& c : s.commit_comments)
        ccs.push_back({{"id", c.id},
                       {"commit_sha", c.commit_sha},
                       {"author_login", opt(c.author_login)},
                       {"created_at", opt(c.created_at)}});
    j["commit_comments"] = std::move(ccs);

    json users = json::array();
    for (const auto& u : s.users)
        users.push_back({{"login", u.login},
                         {"created_at", opt(u.created_at)},
                         {"emails_seen", u.emails_seen},
                         {"organizations", u.organizations}});
    j["users"] = std::move(users);

    json bindings = json::array();
    for (const auto& b : s.email_bindings) bindings.push_back({{"email", b.email}, {"login", b.login}});
    j["email_bindings"] = std::move(bindings);
    return j;
}

RepoSnapshot snapshot_from_json(const json& j) {
    const Reader root(j, "");
    const auto version = root.integer("schema_version");
    if (version != kSnapshotSchemaVersion)
        throw Error(ErrorKind::Version, "unsupported snapshot schema_version " + std::to_string(version) + " (expected " +
                                            std::to_string(kSnapshotSchemaVersion) + ")");
    RepoSnapshot s;
    s.schema_version = static_cast<int>(version);
    s.collected_at = root.time("collected_at");

    s.repository = read_repository(root.object("repository"));

    s.pull_requests = root.list<PullRequest>("pull_requests", [](const Reader& r) {
        PullRequest pr;
        pr.number = r.integer("number");
        pr.id = r.text("id");
        pr.author_login = r.opt_text("author_login");
        pr.created_at = r.opt_time("created_at");
        pr.merged_by_login = r.opt_text("merged_by_login");
        pr.merged_at = r.opt_time("merged_at");
        pr.base_ref = r.text("base_ref");
        pr.reviews = r.list<Review>("reviews", [](const Reader& rv) {
            return Review{rv.text("id"), rv.opt_text("author_login"), rv.opt_time("submitted_at"), rv.text("state")};
        });
        pr.review_comments = r.list<ReviewComment>("review_comments", [](const Reader& rc) {
            return ReviewComment{rc.text("id"), rc.opt_text("author_login"), rc.opt_time("created_at"),
                                 rc.opt_text("review_id")};
        });
        pr.content_edits = r.list<ContentEdit>("content_edits", read_edit);
        return pr;
    });
    s.issues = root.list<Issue>("issues", read_issue);
    s.discussions = root.list<Discussion>("discussions", read_issue);
    s.commits = root.list<SnapshotCommit>("commits", [](const Reader& r) {
        return SnapshotCommit{r.text("sha"), r.time("authored_at"), r.time("committed_at"),
                              read_actor(r.object("author")), read_actor(r.object("committer"))};
    });
    s.commit_comments = root.list<CommitComment>("commit_comments", [](const Reader& r) {
        return CommitComment{r.text("id"), r.text("commit_sha"), r.opt_text("author_login"), r.opt_time("created_at")};
    });
    s.users = root.list<SnapshotUser>("users", [](const Reader& r) {
        return SnapshotUser{r.text("login"), r.opt_time("created_at"), r.strings("emails_seen"),
                            r.strings("organizations")};
    });
    // Optional: older collectors did not resolve extra emails.
    if (j.contains("email_bindings"))
        s.email_bindings = root.list<EmailBinding>("email_bindings", [](const Reader& r) {
            return EmailBinding{r.text("email"), r.text("login")};
        });
    return s;
}

std::string dump_snapshot(const RepoSnapshot& snapshot) { return snapshot_to_json(snapshot).dump(2) + "\n"; }

void save_snapshot(const RepoSnapshot& snapshot, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Input, "cannot write snapshot " + path.string());
    out << dump_snapshot(snapshot);
    if (!out.flush()) throw Error(ErrorKind::Input, "failed writing snapshot " + path.string());
}

RepoSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Input, "cannot read snapshot " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    return snapshot_from_json(j);
}

std::vector<std::string> referenced_logins(const RepoSnapshot& s) {
    std::set<std::string> logins;
    auto add = [&](const Login& l) {
        if (l) logins.insert(*l);
    };
    for (const auto& pr : s.pull_requests) {
        add(pr.author_login);
        add(pr.merged_by_login);
        for (const auto& r : pr.reviews) add(r.author_login);
        for (const auto& c : pr.review_comments) add(c.author_login);
        for (const auto& e : pr.content_edits) add(e.editor_login);
    }
    for (const auto* list : {&s.issues, &s.discussions})
        for (const auto& i : *list) {
            add(i.author_login);
            for (const auto& c : i.comments) add(c.author_login);
            for (const auto& e : i.content_edits) add(e.editor_login);
        }
    for (const auto& c : s.commits) {
        add(c.author.user_login);
        add(c.committer.user_login);
    }
    for (const auto& c : s.commit_comments) add(c.author_login);
    for (const auto& b : s.email_bindings) logins.insert(b.login);
    return {logins.begin(), logins.end()};
}

} // namespace personagraph
