#include "personagraph/collector.hpp"

#include "personagraph/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>

namespace personagraph {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kActorFields = "login ... on User { createdAt }";

const std::string kTotalsQuery = R"(query RepositoryTotals($owner: String!, $name: String!) {
  rateLimit { cost remaining resetAt }
  repository(owner: $owner, name: $name) {
    name createdAt
    owner { __typename login ... on Organization { email } }
    defaultBranchRef { name target { ... on Commit { history { totalCount } } } }
    pullRequests { totalCount }
    issues { totalCount }
    discussions { totalCount }
    commitComments { totalCount }
  }
})";

std::string page_query(Connection c) {
    const std::string actor = "{ " + std::string(kActorFields) + " }";
    const std::string header = "($owner: String!, $name: String!, $first: Int!, $after: String)";
    const std::string page = "pageInfo { hasNextPage endCursor }";
    const std::string rate = "rateLimit { cost remaining resetAt }";
    const std::string edits = "userContentEdits(first: 100) { nodes { id editedAt editor " + actor + " } }";
    const std::string comments = "comments(first: 100) { nodes { id createdAt author " + actor + " } }";
    switch (c) {
    case Connection::PullRequests:
        return "query PullRequestsPage" + header + " { " + rate +
               " repository(owner: $owner, name: $name) { pullRequests(first: $first, after: $after, orderBy: "
               "{field: CREATED_AT, direction: ASC}) { " + page +
               " nodes { id number createdAt mergedAt baseRefName author " + actor + " mergedBy " + actor +
               " reviews(first: 100) { nodes { id state submittedAt author " + actor +
               " comments(first: 100) { nodes { id createdAt author " + actor + " } } } } " + edits + " } } } }";
    case Connection::Issues:
        return "query IssuesPage" + header + " { " + rate +
               " repository(owner: $owner, name: $name) { issues(first: $first, after: $after, orderBy: {field: "
               "CREATED_AT, direction: ASC}) { " + page + " nodes { id number createdAt author " + actor + " " +
               comments + " " + edits + " } } } }";
    case Connection::Discussions:
        return "query DiscussionsPage" + header + " { " + rate +
               " repository(owner: $owner, name: $name) { discussions(first: $first, after: $after, orderBy: "
               "{field: CREATED_AT, direction: ASC}) { " + page + " nodes { id number createdAt author " + actor +
               " " + comments + " " + edits + " } } } }";
    case Connection::Commits: {
        const std::string git_actor = "{ name email user { login createdAt } }";
        return "query CommitsPage" + header + " { " + rate +
               " repository(owner: $owner, name: $name) { defaultBranchRef { target { ... on Commit { "
               "history(first: $first, after: $after) { " + page + " nodes { oid authoredDate committedDate author " +
               git_actor + " committer " + git_actor + " } } } } } } }";
    }
    case Connection::CommitComments:
        return "query CommitCommentsPage" + header + " { " + rate +
               " repository(owner: $owner, name: $name) { commitComments(first: $first, after: $after) { " + page +
               " nodes { id createdAt author " + actor + " commit { oid } } } } }";
    }
    return {};
}

std::string operation_name(Connection c) {
    switch (c) {
    case Connection::PullRequests: return "PullRequestsPage";
    case Connection::Issues: return "IssuesPage";
    case Connection::Discussions: return "DiscussionsPage";
    case Connection::Commits: return "CommitsPage";
    case Connection::CommitComments: return "CommitCommentsPage";
    }
    return {};
}

const json* walk(const json& root, std::initializer_list<std::string_view> keys) {
    const json* cur = &root;
    for (auto k : keys) {
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(std::string(k));
        if (it == cur->end() || it->is_null()) return nullptr;
        cur = &*it;
    }
    return cur;
}

[[noreturn]] void malformed(std::string_view what, std::string_view why) {
    throw Error(ErrorKind::Parse, "malformed " + std::string(what) + " response: " + std::string(why));
}

/// Maps transport status and GraphQL error objects onto error kinds and
/// returns the `data` member.
const json& checked_data(const TransportResponse& r, std::string_view what) {
    if (r.status == 401 || r.status == 403)
        throw Error(ErrorKind::Auth, std::string(what) + ": credential rejected (HTTP " + std::to_string(r.status) + ")");
    if (r.status != 200)
        throw Error(ErrorKind::Transport, std::string(what) + ": HTTP " + std::to_string(r.status));
    if (!r.body.is_object()) malformed(what, "body is not an object");
    if (auto it = r.body.find("errors"); it != r.body.end() && it->is_array() && !it->empty()) {
        for (const auto& e : *it) {
            const std::string type = e.value("type", "");
            const std::string message = e.value("message", "");
            if (type == "NOT_FOUND") throw Error(ErrorKind::NotFound, std::string(what) + ": " + message);
            if (type == "INVALID_CURSOR_ARGUMENTS")
                throw Error(ErrorKind::CursorInvalidated, std::string(what) + ": " + message);
            if (type == "FORBIDDEN" || type == "UNAUTHORIZED")
                throw Error(ErrorKind::Auth, std::string(what) + ": " + message);
        }
        throw Error(ErrorKind::Transport, std::string(what) + ": " + (*it)[0].value("message", "GraphQL error"));
    }
    auto data = r.body.find("data");
    if (data == r.body.end() || !data->is_object()) malformed(what, "no data");
    return *data;
}

std::int64_t attributed_cost(const json& data) {
    if (const auto* cost = walk(data, {"rateLimit", "cost"}); cost && cost->is_number_integer())
        return std::max<std::int64_t>(0, cost->get<std::int64_t>());
    return 1;
}

std::int64_t total_at(const json& data, std::initializer_list<std::string_view> keys) {
    const auto* v = walk(data, keys);
    if (!v) return 0;
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) malformed("RepositoryTotals", "bad totalCount");
    return v->get<std::int64_t>();
}

const json* connection_of(const json& data, Connection c) {
    switch (c) {
    case Connection::PullRequests: return walk(data, {"repository", "pullRequests"});
    case Connection::Issues: return walk(data, {"repository", "issues"});
    case Connection::Discussions: return walk(data, {"repository", "discussions"});
    case Connection::Commits: return walk(data, {"repository", "defaultBranchRef", "target", "history"});
    case Connection::CommitComments: return walk(data, {"repository", "commitComments"});
    }
    return nullptr;
}

// ---- API node -> snapshot entity ----

std::optional<std::string> text_at(const json& node, std::initializer_list<std::string_view> keys) {
    const auto* v = walk(node, keys);
    if (!v || !v->is_string()) return std::nullopt;
    return v->get<std::string>();
}

std::optional<Timestamp> time_at(const json& node, std::initializer_list<std::string_view> keys) {
    auto s = text_at(node, keys);
    if (!s) return std::nullopt;
    auto t = parse_timestamp(*s);
    if (!t) throw Error(ErrorKind::Parse, "invalid timestamp '" + *s + "' in page");
    return t;
}

std::string required_text(const json& node, std::string_view field, std::string_view what) {
    auto s = text_at(node, {field});
    if (!s) throw Error(ErrorKind::Parse, std::string(what) + ": missing '" + std::string(field) + "'");
    return *s;
}

const json& nodes_of(const json& node, std::string_view connection) {
    static const json empty = json::array();
    const auto* v = walk(node, {connection, "nodes"});
    return v && v->is_array() ? *v : empty;
}

std::vector<ContentEdit> read_edits(const json& node) {
    std::vector<ContentEdit> out;
    for (const auto& e : nodes_of(node, "userContentEdits"))
        out.push_back({required_text(e, "id", "content edit"), text_at(e, {"editor", "login"}), time_at(e, {"editedAt"})});
    return out;
}

std::vector<Comment> read_comments(const json& node) {
    std::vector<Comment> out;
    for (const auto& c : nodes_of(node, "comments"))
        out.push_back({required_text(c, "id", "comment"), text_at(c, {"author", "login"}), time_at(c, {"createdAt"})});
    return out;
}

std::int64_t number_of(const json& node, std::string_view what) {
    const auto* n = walk(node, {"number"});
    if (!n || !n->is_number_integer()) throw Error(ErrorKind::Parse, std::string(what) + ": missing 'number'");
    return n->get<std::int64_t>();
}

Issue read_issue_node(const json& n, std::string_view what) {
    Issue i;
    i.number = number_of(n, what);
    i.id = required_text(n, "id", what);
    i.author_login = text_at(n, {"author", "login"});
    i.created_at = time_at(n, {"createdAt"});
    i.comments = read_comments(n);
    i.content_edits = read_edits(n);
    return i;
}

PullRequest read_pr_node(const json& n) {
    PullRequest pr;
    pr.number = number_of(n, "pull request");
    pr.id = required_text(n, "id", "pull request");
    pr.author_login = text_at(n, {"author", "login"});
    pr.created_at = time_at(n, {"createdAt"});
    pr.merged_by_login = text_at(n, {"mergedBy", "login"});
    pr.merged_at = time_at(n, {"mergedAt"});
    pr.base_ref = text_at(n, {"baseRefName"}).value_or("");
    for (const auto& r : nodes_of(n, "reviews")) {
        Review rv{required_text(r, "id", "review"), text_at(r, {"author", "login"}), time_at(r, {"submittedAt"}),
                  text_at(r, {"state"}).value_or("")};
        for (const auto& c : nodes_of(r, "comments"))
            pr.review_comments.push_back(
                {required_text(c, "id", "review comment"), text_at(c, {"author", "login"}), time_at(c, {"createdAt"}), rv.id});
        pr.reviews.push_back(std::move(rv));
    }
    pr.content_edits = read_edits(n);
    return pr;
}

GitActor read_git_actor(const json& a) {
    return {text_at(a, {"name"}).value_or(""), text_at(a, {"email"}).value_or(""), text_at(a, {"user", "login"})};
}

SnapshotCommit read_commit_node(const json& n) {
    SnapshotCommit c;
    c.sha = required_text(n, "oid", "commit");
    auto authored = time_at(n, {"authoredDate"});
    auto committed = time_at(n, {"committedDate"});
    if (!authored || !committed) throw Error(ErrorKind::Parse, "commit " + c.sha + ": missing dates");
    c.authored_at = *authored;
    c.committed_at = *committed;
    static const json null_actor = json::object();
    const auto* a = walk(n, {"author"});
    const auto* m = walk(n, {"committer"});
    c.author = read_git_actor(a ? *a : null_actor);
    c.committer = read_git_actor(m ? *m : null_actor);
    return c;
}

std::string normalize_email(std::string_view email) { return detail::to_lower_ascii(detail::trim(email)); }

/// Every actor object in a raw node tree that carries a createdAt.
void collect_created(const json& node, std::map<std::string, Timestamp>& out) {
    if (node.is_object()) {
        auto login = node.find("login");
        auto created = node.find("createdAt");
        if (login != node.end() && login->is_string() && created != node.end() && created->is_string()) {
            if (auto t = parse_timestamp(created->get<std::string>())) out.emplace(login->get<std::string>(), *t);
        }
        for (const auto& [k, v] : node.items()) collect_created(v, out);
    } else if (node.is_array()) {
        for (const auto& v : node) collect_created(v, out);
    }
}

RepoSnapshot build_snapshot(const CollectionPlan& plan, Timestamp collected_at) {
    RepoSnapshot s;
    s.repository = plan.meta;
    s.collected_at = collected_at;
    for (const auto& n : plan.state(Connection::PullRequests).nodes) s.pull_requests.push_back(read_pr_node(n));
    for (const auto& n : plan.state(Connection::Issues).nodes) s.issues.push_back(read_issue_node(n, "issue"));
    for (const auto& n : plan.state(Connection::Discussions).nodes) s.discussions.push_back(read_issue_node(n, "discussion"));
    for (const auto& n : plan.state(Connection::Commits).nodes) s.commits.push_back(read_commit_node(n));
    for (const auto& n : plan.state(Connection::CommitComments).nodes)
        s.commit_comments.push_back({required_text(n, "id", "commit comment"), text_at(n, {"commit", "oid"}).value_or(""),
                                     text_at(n, {"author", "login"}), time_at(n, {"createdAt"})});

    std::map<std::string, Timestamp> created;
    for (const auto& [name, st] : plan.connections) collect_created(st.nodes, created);

    std::map<std::string, std::set<std::string>> emails;
    for (const auto& c : s.commits)
        for (const auto* actor : {&c.author, &c.committer})
            if (actor->user_login && !normalize_email(actor->email).empty())
                emails[*actor->user_login].insert(normalize_email(actor->email));

    for (const auto& login : referenced_logins(s)) {
        SnapshotUser u;
        u.login = login;
        if (auto it = created.find(login); it != created.end()) u.created_at = it->second;
        if (auto it = emails.find(login); it != emails.end()) u.emails_seen.assign(it->second.begin(), it->second.end());
        s.users.push_back(std::move(u));
    }
    return s;
}

} // namespace

// ---- requests and budget ----

std::string GraphQLRequest::key() const { return operation + " " + variables.dump(); }

RateBudget::RateBudget(std::int64_t points, Timestamp window_reset_at)
    : remaining_(std::max<std::int64_t>(0, points)), reset_at_(window_reset_at) {}

std::int64_t RateBudget::points_remaining() const {
    std::lock_guard lock(mutex_);
    return remaining_;
}

Timestamp RateBudget::window_reset_at() const {
    std::lock_guard lock(mutex_);
    return reset_at_;
}

std::int64_t RateBudget::total_charged() const {
    std::lock_guard lock(mutex_);
    return charged_;
}

bool RateBudget::can_afford(std::int64_t cost) const {
    std::lock_guard lock(mutex_);
    return remaining_ >= cost;
}

std::int64_t RateBudget::charge(std::int64_t cost) {
    std::lock_guard lock(mutex_);
    const auto taken = std::clamp<std::int64_t>(cost, 0, remaining_);
    remaining_ -= taken;
    charged_ += taken;
    return taken;
}

void RateBudget::reset_window(std::int64_t points, Timestamp next_reset_at) {
    std::lock_guard lock(mutex_);
    remaining_ = std::max<std::int64_t>(0, points);
    reset_at_ = next_reset_at;
}

std::string_view to_string(Connection c) noexcept {
    switch (c) {
    case Connection::PullRequests: return "pull_requests";
    case Connection::Issues: return "issues";
    case Connection::Discussions: return "discussions";
    case Connection::Commits: return "commits";
    case Connection::CommitComments: return "commit_comments";
    }
    return "";
}

std::optional<Connection> parse_connection(std::string_view name) noexcept {
    for (auto c : kConnections)
        if (to_string(c) == name) return c;
    return std::nullopt;
}

std::pair<std::string, std::string> split_repository(std::string_view repository) {
    const auto slash = repository.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == repository.size() ||
        repository.find('/', slash + 1) != std::string_view::npos)
        throw Error(ErrorKind::Validation, "repository must be 'owner/name', got '" + std::string(repository) + "'");
    return {std::string(repository.substr(0, slash)), std::string(repository.substr(slash + 1))};
}

// ---- plan persistence ----

json plan_to_json(const CollectionPlan& plan) {
    json conns = json::object();
    for (const auto& [name, st] : plan.connections)
        conns[name] = {{"total", st.total},
                       {"batch_size", st.batch_size},
                       {"cursor", st.cursor ? json(*st.cursor) : json(nullptr)},
                       {"fetched", st.fetched},
                       {"pages", st.pages},
                       {"complete", st.complete},
                       {"last_cost", st.last_cost},
                       {"nodes", st.nodes}};
    return {{"plan_version", 1}, {"repository", plan.repository}, {"meta", repository_to_json(plan.meta)}, {"connections", conns}};
}

CollectionPlan plan_from_json(const json& j) {
    try {
        if (j.at("plan_version").get<int>() != 1) throw Error(ErrorKind::Version, "unsupported collection state version");
        CollectionPlan plan;
        plan.repository = j.at("repository").get<std::string>();
        plan.meta = repository_from_json(j.at("meta"));
        for (auto c : kConnections) {
            const auto name = std::string(to_string(c));
            const auto& v = j.at("connections").at(name);
            ConnectionState st;
            st.total = v.at("total").get<std::int64_t>();
            st.batch_size = v.at("batch_size").get<int>();
            if (!v.at("cursor").is_null()) st.cursor = v.at("cursor").get<std::string>();
            st.fetched = v.at("fetched").get<std::int64_t>();
            st.pages = v.at("pages").get<std::int64_t>();
            st.complete = v.at("complete").get<bool>();
            st.last_cost = v.at("last_cost").get<std::int64_t>();
            st.nodes = v.at("nodes");
            if (!st.nodes.is_array()) throw Error(ErrorKind::Parse, "collection state: nodes of " + name + " is not an array");
            plan.connections.emplace(name, std::move(st));
        }
        return plan;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("collection state: ") + e.what());
    }
}

void save_plan(const CollectionPlan& plan, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Input, "cannot write collection state " + path.string());
    out << plan_to_json(plan).dump() << '\n';
    if (!out.flush()) throw Error(ErrorKind::Input, "failed writing collection state " + path.string());
}

CollectionPlan load_plan(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Input, "cannot read collection state " + path.string());
    try {
        return plan_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

// ---- collection ----

CollectionPlan plan_collection(std::string_view repository, Transport& transport, RateBudget& budget,
                               const PlanOptions& options) {
    auto [owner, name] = split_repository(repository);
    auto clamp_batch = [](int b) {
        if (b < 1 || b > kMaxPageSize)
            throw Error(ErrorKind::Validation, "batch size must be within 1.." + std::to_string(kMaxPageSize));
        return b;
    };
    clamp_batch(options.batch_size);
    if (!budget.can_afford(1)) throw Error(ErrorKind::Transport, "rate budget exhausted before planning " + std::string(repository));

    GraphQLRequest req{"RepositoryTotals", kTotalsQuery, {{"owner", owner}, {"name", name}}};
    const auto response = transport.execute(req);
    const auto& data = checked_data(response, "RepositoryTotals");
    budget.charge(attributed_cost(data));

    const auto* repo = walk(data, {"repository"});
    if (!repo) throw Error(ErrorKind::NotFound, "repository " + std::string(repository) + " not found");

    CollectionPlan plan;
    plan.repository = std::string(repository);
    plan.meta.owner = text_at(*repo, {"owner", "login"}).value_or(owner);
    plan.meta.name = text_at(*repo, {"name"}).value_or(name);
    plan.meta.created_at = time_at(*repo, {"createdAt"});
    plan.meta.owner_type = text_at(*repo, {"owner", "__typename"}).value_or("User");
    plan.meta.owner_email = text_at(*repo, {"owner", "email"});
    if (plan.meta.owner_email && plan.meta.owner_email->empty()) plan.meta.owner_email.reset();
    plan.meta.default_branch = text_at(*repo, {"defaultBranchRef", "name"}).value_or("");

    const std::pair<Connection, std::int64_t> totals[] = {
        {Connection::PullRequests, total_at(*repo, {"pullRequests", "totalCount"})},
        {Connection::Issues, total_at(*repo, {"issues", "totalCount"})},
        {Connection::Discussions, total_at(*repo, {"discussions", "totalCount"})},
        {Connection::Commits, total_at(*repo, {"defaultBranchRef", "target", "history", "totalCount"})},
        {Connection::CommitComments, total_at(*repo, {"commitComments", "totalCount"})},
    };
    for (const auto& [c, total] : totals) {
        ConnectionState st;
        st.total = total;
        const auto cname = std::string(to_string(c));
        auto it = options.batch_overrides.find(cname);
        st.batch_size = clamp_batch(it != options.batch_overrides.end() ? it->second : options.batch_size);
        plan.connections.emplace(cname, std::move(st));
    }
    return plan;
}

CollectionOutcome collect_repository(CollectionPlan plan, Transport& transport, RateBudget& budget,
                                     Timestamp collected_at) {
    auto [owner, name] = split_repository(plan.repository);
    for (auto c : kConnections) {
        auto& st = plan.state(c);
        if (st.total == 0 && st.pages == 0) st.complete = true;
        bool restarted = false;
        while (!st.complete) {
            if (!budget.can_afford(std::max<std::int64_t>(1, st.last_cost))) return Suspended{std::move(plan)};

            GraphQLRequest req{operation_name(c), page_query(c),
                               {{"owner", owner},
                                {"name", name},
                                {"first", st.batch_size},
                                {"after", st.cursor ? json(*st.cursor) : json(nullptr)}}};
            const auto response = transport.execute(req);
            json data;
            try {
                data = checked_data(response, req.operation);
            } catch (const Error& e) {
                // A stale cursor invalidates the pages behind it too; start
                // the connection over, but only once.
                if (e.kind() != ErrorKind::CursorInvalidated || restarted || !st.cursor) throw;
                restarted = true;
                restart_connection(plan, c);
                continue;
            }
            const auto cost = attributed_cost(data);
            budget.charge(cost);
            st.last_cost = cost;

            const auto* conn = connection_of(data, c);
            if (!conn) malformed(req.operation, "connection missing");
            const auto* nodes = walk(*conn, {"nodes"});
            const auto* has_next = walk(*conn, {"pageInfo", "hasNextPage"});
            if (!nodes || !nodes->is_array() || !has_next || !has_next->is_boolean())
                malformed(req.operation, "nodes or pageInfo missing");
            for (const auto& n : *nodes) st.nodes.push_back(n);
            st.fetched += static_cast<std::int64_t>(nodes->size());
            ++st.pages;
            if (has_next->get<bool>()) {
                const auto cursor = text_at(*conn, {"pageInfo", "endCursor"});
                if (!cursor) malformed(req.operation, "hasNextPage without endCursor");
                st.cursor = cursor;
            } else {
                st.complete = true;
                // Live repositories drift during long collections; the fetched
                // set is what the snapshot holds.
                st.total = st.fetched;
            }
        }
    }
    return build_snapshot(plan, collected_at);
}

void restart_connection(CollectionPlan& plan, Connection connection) {
    auto& st = plan.state(connection);
    st.cursor.reset();
    st.fetched = 0;
    st.pages = 0;
    st.complete = false;
    st.nodes = json::array();
}

// ---- email resolution ----

std::set<std::string> bound_emails(const RepoSnapshot& snapshot) {
    std::set<std::string> out;
    for (const auto& c : snapshot.commits)
        for (const auto* a : {&c.author, &c.committer})
            if (a->user_login && !normalize_email(a->email).empty()) out.insert(normalize_email(a->email));
    for (const auto& b : snapshot.email_bindings) out.insert(normalize_email(b.email));
    return out;
}

EmailResolution resolve_emails_to_users(std::string_view repository, const std::set<std::string>& emails,
                                        const std::set<std::string>& known, Transport& transport, RateBudget& budget,
                                        int batch_size) {
    if (batch_size < 1 || batch_size > kMaxPageSize)
        throw Error(ErrorKind::Validation, "batch size must be within 1.." + std::to_string(kMaxPageSize));
    auto [owner, name] = split_repository(repository);

    std::vector<std::string> pending;
    {
        std::set<std::string> unique;
        for (const auto& e : emails) {
            auto n = normalize_email(e);
            if (n.empty() || known.contains(n)) continue;
            if (unique.insert(n).second) pending.push_back(std::move(n));
        }
    }

    EmailResolution result;
    for (std::size_t start = 0; start < pending.size(); start += static_cast<std::size_t>(batch_size)) {
        const auto end = std::min(pending.size(), start + static_cast<std::size_t>(batch_size));
        if (!budget.can_afford(1)) {
            result.errors.push_back("rate budget exhausted; " + std::to_string(pending.size() - start) +
                                    " email(s) not looked up");
            break;
        }
        std::string query = "query ResolveEmails($owner: String!, $name: String!) { rateLimit { cost remaining resetAt } "
                            "repository(owner: $owner, name: $name) {";
        json batch = json::array();
        for (std::size_t i = start; i < end; ++i) {
            batch.push_back(pending[i]);
            query += " e" + std::to_string(i - start) +
                     ": defaultBranchRef { target { ... on Commit { history(first: 1, author: {emails: [" +
                     json(pending[i]).dump() + "]}) { nodes { author { user { login createdAt } } } } } } }";
        }
        query += " } }";
        GraphQLRequest req{"ResolveEmails", std::move(query), {{"owner", owner}, {"name", name}, {"emails", batch}}};
        ++result.requests;
        try {
            const auto response = transport.execute(req);
            const auto& data = checked_data(response, "ResolveEmails");
            budget.charge(attributed_cost(data));
            for (std::size_t i = start; i < end; ++i) {
                const auto alias = "e" + std::to_string(i - start);
                const auto* nodes = walk(data, {"repository", alias, "target", "history", "nodes"});
                std::optional<std::string> login;
                if (nodes && nodes->is_array() && !nodes->empty()) {
                    login = text_at((*nodes)[0], {"author", "user", "login"});
                    if (login) result.user_created_at.emplace(*login, time_at((*nodes)[0], {"author", "user", "createdAt"}));
                }
                result.logins[pending[i]] = login;
            }
        } catch (const Error& e) {
            result.errors.push_back(std::string(to_string(e.kind())) + ": " + e.what());
        }
    }
    return result;
}

void apply_email_resolution(RepoSnapshot& snapshot, const EmailResolution& resolution) {
    for (const auto& [email, login] : resolution.logins) {
        if (!login) continue;
        const bool present = std::any_of(snapshot.email_bindings.begin(), snapshot.email_bindings.end(),
                                         [&](const EmailBinding& b) { return b.email == email; });
        if (!present) snapshot.email_bindings.push_back({email, *login});
        auto user = std::find_if(snapshot.users.begin(), snapshot.users.end(),
                                 [&](const SnapshotUser& u) { return u.login == *login; });
        if (user == snapshot.users.end()) {
            SnapshotUser u;
            u.login = *login;
            if (auto it = resolution.user_created_at.find(*login); it != resolution.user_created_at.end()) u.created_at = it->second;
            snapshot.users.push_back(std::move(u));
        }
    }
    std::sort(snapshot.email_bindings.begin(), snapshot.email_bindings.end(),
              [](const EmailBinding& a, const EmailBinding& b) { return a.email < b.email; });
    std::sort(snapshot.users.begin(), snapshot.users.end(),
              [](const SnapshotUser& a, const SnapshotUser& b) { return a.login < b.login; });
}

} // namespace personagraph
