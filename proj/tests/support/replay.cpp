#include "support.hpp"

#include <algorithm>

namespace pgtest {

using nlohmann::json;

namespace {

class Encoder {
public:
    explicit Encoder(const RepoSnapshot& s) {
        for (const auto& u : s.users) created_[u.login] = u.created_at;
    }

    json actor(const Login& login) const {
        if (!login) return nullptr;
        json a = {{"login", *login}};
        if (auto it = created_.find(*login); it != created_.end() && it->second) a["createdAt"] = format_timestamp(*it->second);
        return a;
    }

    static json time(const std::optional<Timestamp>& t) { return t ? json(format_timestamp(*t)) : json(nullptr); }

    json edits(const std::vector<ContentEdit>& list) const {
        json nodes = json::array();
        for (const auto& e : list) nodes.push_back({{"id", e.id}, {"editedAt", time(e.edited_at)}, {"editor", actor(e.editor_login)}});
        return {{"nodes", nodes}};
    }

    json comments(const std::vector<Comment>& list) const {
        json nodes = json::array();
        for (const auto& c : list) nodes.push_back({{"id", c.id}, {"createdAt", time(c.created_at)}, {"author", actor(c.author_login)}});
        return {{"nodes", nodes}};
    }

    json pr(const PullRequest& p) const {
        json reviews = json::array();
        for (const auto& r : p.reviews) {
            json rc = json::array();
            for (const auto& c : p.review_comments)
                if (c.review_id == r.id)
                    rc.push_back({{"id", c.id}, {"createdAt", time(c.created_at)}, {"author", actor(c.author_login)}});
            reviews.push_back({{"id", r.id},
                               {"state", r.state},
                               {"submittedAt", time(r.submitted_at)},
                               {"author", actor(r.author_login)},
                               {"comments", {{"nodes", rc}}}});
        }
        return {{"id", p.id},
                {"number", p.number},
                {"createdAt", time(p.created_at)},
                {"mergedAt", time(p.merged_at)},
                {"baseRefName", p.base_ref},
                {"author", actor(p.author_login)},
                {"mergedBy", actor(p.merged_by_login)},
                {"reviews", {{"nodes", reviews}}},
                {"userContentEdits", edits(p.content_edits)}};
    }

    json thread(const Issue& i) const {
        return {{"id", i.id},
                {"number", i.number},
                {"createdAt", time(i.created_at)},
                {"author", actor(i.author_login)},
                {"comments", comments(i.comments)},
                {"userContentEdits", edits(i.content_edits)}};
    }

    json git_actor(const GitActor& a) const {
        json user = nullptr;
        if (a.user_login) user = actor(a.user_login);
        return {{"name", a.name}, {"email", a.email}, {"user", user}};
    }

    json commit(const SnapshotCommit& c) const {
        return {{"oid", c.sha},
                {"authoredDate", format_timestamp(c.authored_at)},
                {"committedDate", format_timestamp(c.committed_at)},
                {"author", git_actor(c.author)},
                {"committer", git_actor(c.committer)}};
    }

    json commit_comment(const CommitComment& c) const {
        return {{"id", c.id}, {"createdAt", time(c.created_at)}, {"author", actor(c.author_login)}, {"commit", {{"oid", c.commit_sha}}}};
    }

private:
    std::map<std::string, std::optional<Timestamp>> created_;
};

json rate(std::int64_t cost) { return {{"cost", cost}, {"remaining", 5000}, {"resetAt", "2025-03-27T01:00:00Z"}}; }

/// Wraps one page of a connection in the response path the collector reads.
json wrap(Connection c, json connection) {
    switch (c) {
    case Connection::PullRequests: return {{"repository", {{"pullRequests", connection}}}};
    case Connection::Issues: return {{"repository", {{"issues", connection}}}};
    case Connection::Discussions: return {{"repository", {{"discussions", connection}}}};
    case Connection::Commits:
        return {{"repository", {{"defaultBranchRef", {{"target", {{"history", connection}}}}}}}};
    case Connection::CommitComments: return {{"repository", {{"commitComments", connection}}}};
    }
    return {};
}

std::string operation(Connection c) {
    switch (c) {
    case Connection::PullRequests: return "PullRequestsPage";
    case Connection::Issues: return "IssuesPage";
    case Connection::Discussions: return "DiscussionsPage";
    case Connection::Commits: return "CommitsPage";
    case Connection::CommitComments: return "CommitCommentsPage";
    }
    return {};
}

} // namespace

void write_replay(const RepoSnapshot& s, const fs::path& dir, const ReplayOptions& options) {
    fs::create_directories(dir);
    const auto& meta = s.repository;
    Encoder enc(s);

    json owner = {{"__typename", meta.owner_type}, {"login", meta.owner}};
    if (meta.owner_type == "Organization") owner["email"] = meta.owner_email ? json(*meta.owner_email) : json(nullptr);
    json repo = {{"name", meta.name},
                 {"createdAt", Encoder::time(meta.created_at)},
                 {"owner", owner},
                 {"defaultBranchRef",
                  {{"name", meta.default_branch}, {"target", {{"history", {{"totalCount", s.commits.size()}}}}}}},
                 {"pullRequests", {{"totalCount", s.pull_requests.size()}}},
                 {"issues", {{"totalCount", s.issues.size()}}},
                 {"discussions", {{"totalCount", s.discussions.size()}}},
                 {"commitComments", {{"totalCount", s.commit_comments.size()}}}};
    write_exchange(dir, {"RepositoryTotals", "", {{"owner", meta.owner}, {"name", meta.name}}},
                   {200, {{"data", {{"rateLimit", rate(1)}, {"repository", repo}}}}});

    std::map<Connection, std::vector<json>> nodes;
    for (const auto& p : s.pull_requests) nodes[Connection::PullRequests].push_back(enc.pr(p));
    for (const auto& i : s.issues) nodes[Connection::Issues].push_back(enc.thread(i));
    for (const auto& i : s.discussions) nodes[Connection::Discussions].push_back(enc.thread(i));
    for (const auto& c : s.commits) nodes[Connection::Commits].push_back(enc.commit(c));
    for (const auto& c : s.commit_comments) nodes[Connection::CommitComments].push_back(enc.commit_comment(c));

    const auto batch = static_cast<std::size_t>(options.batch_size);
    for (auto c : kConnections) {
        const auto& all = nodes[c];
        for (std::size_t start = 0; start < all.size(); start += batch) {
            const auto end = std::min(all.size(), start + batch);
            const bool more = end < all.size();
            json page = json::array();
            for (std::size_t i = start; i < end; ++i) page.push_back(all[i]);
            const json after = start == 0 ? json(nullptr) : json(std::string(to_string(c)) + ":" + std::to_string(start));
            json connection = {{"nodes", page},
                               {"pageInfo",
                                {{"hasNextPage", more},
                                 {"endCursor", json(std::string(to_string(c)) + ":" + std::to_string(end))}}}};
            json data = wrap(c, connection);
            data["rateLimit"] = rate(options.page_cost);
            write_exchange(dir,
                           {operation(c), "",
                            {{"owner", meta.owner}, {"name", meta.name}, {"first", options.batch_size}, {"after", after}}},
                           {200, {{"data", data}}});
        }
    }
}

} // namespace pgtest
