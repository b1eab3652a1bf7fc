#include "personagraph/ingest.hpp"

#include "personagraph/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace personagraph {

namespace {

using enum NodeLabel;

auto edge_order(const Edge& e) { return std::make_tuple(e.src.value, static_cast<int>(e.rel), e.dst.value); }

/// Phase-one node upserts record their ids and the relationships they imply;
/// phase two reduces those to a distinct set and inserts them.
class Batch {
public:
    explicit Batch(GraphStore& store) : store_(store) {}

    NodeId node(NodeLabel label, std::string_view key, const PropertyMap& props = {}) {
        const auto r = store_.upsert(label, key, props);
        if (r.created) {
            ++stats_.nodes_created;
            ++stats_.created_by_label[static_cast<std::size_t>(label)];
        } else {
            ++stats_.nodes_updated;
        }
        return r.id;
    }

    void relate(NodeId src, RelType rel, NodeId dst) { pending_.push_back(Edge{src, rel, dst}); }

    IngestStats commit() {
        const auto tentative = pending_.size();
        std::sort(pending_.begin(), pending_.end(), [](const Edge& a, const Edge& b) { return edge_order(a) < edge_order(b); });
        pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
        for (const auto& e : pending_)
            if (store_.add_edge(e.src, e.rel, e.dst)) ++stats_.edges_created;
        stats_.edges_deduplicated = tentative - stats_.edges_created;
        pending_.clear();
        return stats_;
    }

private:
    GraphStore& store_;
    std::vector<Edge> pending_;
    IngestStats stats_;
};

void put(PropertyMap& props, const char* name, const std::optional<Timestamp>& t) {
    if (t) props.emplace(name, *t);
}

void put(PropertyMap& props, const char* name, const std::optional<std::string>& s) {
    if (s) props.emplace(name, *s);
}

std::string scoped(std::string_view repository, char sep, std::string_view tail) {
    std::string k(repository);
    k += sep;
    k += tail;
    return k;
}

std::string numbered(std::string_view repository, std::int64_t number) {
    return scoped(repository, '#', std::to_string(number));
}

EnrichResult& operator+=(EnrichResult& a, const EnrichResult& b) {
    a.edges_created += b.edges_created;
    a.nodes_created += b.nodes_created;
    a.conflicts.insert(a.conflicts.end(), b.conflicts.begin(), b.conflicts.end());
    return a;
}

} // namespace

IngestStats& IngestStats::operator+=(const IngestStats& o) {
    nodes_created += o.nodes_created;
    nodes_updated += o.nodes_updated;
    edges_created += o.edges_created;
    edges_deduplicated += o.edges_deduplicated;
    for (std::size_t i = 0; i < kNodeLabelCount; ++i) created_by_label[i] += o.created_by_label[i];
    return *this;
}

std::string normalize_email(std::string_view email) { return detail::to_lower_ascii(detail::trim(email)); }

std::string git_repository_key(std::string_view repository) { return "https://github.com/" + std::string(repository); }

IngestStats ingest_snapshot(const RepoSnapshot& s, GraphStore& store) {
    {
        std::set<std::string> known;
        for (const auto& u : s.users) known.insert(u.login);
        std::string offenders;
        for (const auto& login : referenced_logins(s))
            if (!known.contains(login)) offenders += (offenders.empty() ? "" : ", ") + login;
        if (!offenders.empty())
            throw Error(ErrorKind::Integrity, "snapshot references logins absent from users: " + offenders);
    }

    const auto repo_key = s.repository.key();
    Batch batch(store);

    PropertyMap repo_props{{"owner", s.repository.owner}, {"name", s.repository.name}};
    put(repo_props, "created_at", s.repository.created_at);
    if (!s.repository.default_branch.empty()) repo_props.emplace("default_branch", s.repository.default_branch);
    const auto repo = batch.node(GithubRepository, repo_key, repo_props);

    std::map<std::string, NodeId> users;
    for (const auto& u : s.users) {
        PropertyMap props{{"login", u.login}};
        put(props, "created_at", u.created_at);
        users.emplace(u.login, batch.node(GithubUser, u.login, props));
    }
    auto user = [&](const Login& login) -> std::optional<NodeId> {
        if (!login) return std::nullopt;
        return users.at(*login);
    };
    auto authored = [&](NodeId entity, const Login& login) {
        if (auto u = user(login)) batch.relate(entity, RelType::AUTHORED_BY, *u);
    };

    if (s.repository.owner_type == "Organization") {
        PropertyMap props{{"login", s.repository.owner}};
        put(props, "email", s.repository.owner_email);
        batch.node(GithubOrganization, s.repository.owner, props);
    }
    for (const auto& u : s.users)
        for (const auto& org : u.organizations)
            batch.relate(users.at(u.login), RelType::MEMBER_OF, batch.node(GithubOrganization, org, {{"login", org}}));

    auto edits = [&](NodeId parent, const std::vector<ContentEdit>& list) {
        for (const auto& e : list) {
            PropertyMap props;
            put(props, "edited_at", e.edited_at);
            const auto id = batch.node(GithubUserContentEdit, e.id, props);
            batch.relate(parent, RelType::HAS_CONTENT_EDIT, id);
            authored(id, e.editor_login);
        }
    };

    for (const auto& pr : s.pull_requests) {
        PropertyMap props{{"number", pr.number}, {"merged", pr.merged_at.has_value()}, {"base_ref", pr.base_ref}};
        if (!pr.id.empty()) props.emplace("id", pr.id);
        put(props, "created_at", pr.created_at);
        put(props, "merged_at", pr.merged_at);
        const auto id = batch.node(GithubPullRequest, numbered(repo_key, pr.number), props);
        batch.relate(repo, RelType::HAS_GITHUB_PULL_REQUEST, id);
        authored(id, pr.author_login);
        if (auto m = user(pr.merged_by_login)) batch.relate(id, RelType::MERGED_BY, *m);
        std::map<std::string, NodeId> reviews;
        for (const auto& rv : pr.reviews) {
            PropertyMap rp{{"state", rv.state}};
            put(rp, "submitted_at", rv.submitted_at);
            const auto rid = batch.node(GithubPullRequestReview, rv.id, rp);
            reviews.emplace(rv.id, rid);
            batch.relate(id, RelType::HAS_REVIEW, rid);
            authored(rid, rv.author_login);
            if (auto r = user(rv.author_login)) batch.relate(id, RelType::REVIEWED_BY, *r);
        }
        for (const auto& rc : pr.review_comments) {
            PropertyMap cp;
            put(cp, "created_at", rc.created_at);
            const auto cid = batch.node(GithubPullRequestReviewComment, rc.id, cp);
            auto parent = rc.review_id ? reviews.find(*rc.review_id) : reviews.end();
            batch.relate(parent != reviews.end() ? parent->second : id, RelType::HAS_REVIEW_COMMENT, cid);
            authored(cid, rc.author_login);
        }
        edits(id, pr.content_edits);
    }

    auto threads = [&](const std::vector<Issue>& list, NodeLabel label, NodeLabel comment_label, RelType has) {
        for (const auto& i : list) {
            PropertyMap props{{"number", i.number}};
            if (!i.id.empty()) props.emplace("id", i.id);
            put(props, "created_at", i.created_at);
            const auto id = batch.node(label, numbered(repo_key, i.number), props);
            batch.relate(repo, has, id);
            authored(id, i.author_login);
            for (const auto& c : i.comments) {
                PropertyMap cp;
                put(cp, "created_at", c.created_at);
                const auto cid = batch.node(comment_label, c.id, cp);
                batch.relate(id, RelType::HAS_COMMENT, cid);
                authored(cid, c.author_login);
            }
            edits(id, i.content_edits);
        }
    };
    threads(s.issues, GithubIssue, GithubIssueComment, RelType::HAS_GITHUB_ISSUE);
    threads(s.discussions, GithubDiscussion, GithubDiscussionComment, RelType::HAS_GITHUB_DISCUSSION);

    std::map<std::string, NodeId> commits;
    for (const auto& c : s.commits) {
        PropertyMap props{{"sha", c.sha},
                          {"authored_at", c.authored_at},
                          {"committed_at", c.committed_at},
                          {"author_name", c.author.name},
                          {"author_email", c.author.email},
                          {"committer_name", c.committer.name},
                          {"committer_email", c.committer.email}};
        put(props, "author_login", c.author.user_login);
        put(props, "committer_login", c.committer.user_login);
        const auto id = batch.node(GithubCommit, scoped(repo_key, '@', c.sha), props);
        commits.emplace(c.sha, id);
        batch.relate(repo, RelType::HAS_GITHUB_COMMIT, id);
        authored(id, c.author.user_login);
    }
    for (const auto& cc : s.commit_comments) {
        PropertyMap props{{"commit_sha", cc.commit_sha}};
        put(props, "created_at", cc.created_at);
        const auto id = batch.node(GithubCommitComment, cc.id, props);
        if (auto it = commits.find(cc.commit_sha); it != commits.end()) batch.relate(it->second, RelType::HAS_COMMENT, id);
        authored(id, cc.author_login);
    }
    for (const auto& b : s.email_bindings) {
        const auto address = normalize_email(b.email);
        if (address.empty()) continue;
        batch.relate(users.at(b.login), RelType::HAS_EMAIL, batch.node(Email, address, {{"address", address}}));
    }
    return batch.commit();
}

IngestStats ingest_commit_stream(std::string_view repository, const std::vector<CommitRecord>& records, GraphStore& store) {
    const std::string repo_key(repository);
    Batch batch(store);
    const auto repo = batch.node(GitRepository, git_repository_key(repo_key),
                                 {{"url", git_repository_key(repo_key)}, {"repository", repo_key}});
    std::map<std::string, NodeId> commits;
    for (const auto& r : records) {
        const auto id = batch.node(GitCommit, scoped(repo_key, '@', r.sha),
                                   {{"sha", r.sha}, {"authored_at", r.authored_at}, {"committed_at", r.committed_at}});
        commits.emplace(r.sha, id);
        batch.relate(repo, RelType::HAS_GIT_COMMIT, id);
    }
    auto identity = [&](const IdentityRecord& who) {
        return batch.node(GitIdentity, who.key(),
                          {{"name", std::string(detail::trim(who.name))}, {"email", std::string(detail::trim(who.email))}});
    };
    for (const auto& r : records) {
        const auto id = commits.at(r.sha);
        batch.relate(id, RelType::GIT_AUTHORED_BY, identity(r.author()));
        batch.relate(id, RelType::GIT_COMMITTED_BY, identity(r.committer()));
        for (const auto& p : r.parent_shas) {
            auto it = commits.find(p);
            // Parents outside the stream (shallow clones) become bare nodes.
            const auto parent = it != commits.end() ? it->second : batch.node(GitCommit, scoped(repo_key, '@', p), {{"sha", p}});
            batch.relate(id, RelType::HAS_PARENT, parent);
        }
    }
    return batch.commit();
}

IngestStats ingest_commit_stream(std::string_view repository, std::string_view stream, GraphStore& store) {
    return ingest_commit_stream(repository, parse_commit_stream(stream), store);
}

IngestStats ingest_branches(std::string_view repository, const std::vector<BranchRecord>& branches, GraphStore& store) {
    const std::string repo_key(repository);
    Batch batch(store);
    const auto repo = batch.node(GitRepository, git_repository_key(repo_key),
                                 {{"url", git_repository_key(repo_key)}, {"repository", repo_key}});
    for (const auto& b : branches) {
        const auto id = batch.node(GitBranch, scoped(repo_key, ':', b.name),
                                   {{"name", b.name}, {"head_sha", b.head_sha}, {"is_default", b.is_default}});
        batch.relate(repo, RelType::HAS_GIT_BRANCH, id);
        if (auto head = store.find(GitCommit, scoped(repo_key, '@', b.head_sha)))
            batch.relate(id, RelType::HAS_GIT_COMMIT, *head);
    }
    return batch.commit();
}

EnrichResult enrich_repo_and_commits(GraphStore& store) {
    EnrichResult result;
    for (auto git_repo : store.nodes_with_label(GitRepository)) {
        const auto repository = get_text(store.node(git_repo), "repository");
        if (!repository) continue;
        if (auto forge = store.find(GithubRepository, *repository))
            result.edges_created += store.add_edge(*forge, RelType::IS_GIT_REPOSITORY, git_repo);
    }
    for (auto commit : store.nodes_with_label(GithubCommit)) {
        // Both sides share the "owner/name@sha" key.
        if (auto git = store.find(GitCommit, store.node(commit).key))
            result.edges_created += store.add_edge(commit, RelType::IS_GIT_COMMIT, *git);
    }
    return result;
}

EnrichResult enrich_identity_links(GraphStore& store) {
    EnrichResult result;
    std::map<std::string, std::string> binding; // email -> login
    std::set<std::tuple<std::string, std::string>> reported;
    auto bind = [&](const std::string& raw_email, const std::string& login) {
        const auto email = normalize_email(raw_email);
        if (email.empty() || login.empty()) return;
        auto [it, inserted] = binding.emplace(email, login);
        if (!inserted && it->second != login && reported.emplace(email, login).second)
            result.conflicts.push_back({email, it->second, login});
    };

    for (auto id : store.nodes_with_label(GithubCommit)) {
        const auto& n = store.node(id);
        for (auto [email_prop, login_prop] : {std::pair{"author_email", "author_login"}, std::pair{"committer_email", "committer_login"}}) {
            auto email = get_text(n, email_prop);
            auto login = get_text(n, login_prop);
            if (email && login) bind(*email, *login);
        }
    }
    for (const auto& e : store.edges()) {
        if (e.rel != RelType::HAS_EMAIL) continue;
        const auto& src = store.node(e.src);
        if (src.label != GithubUser) continue;
        bind(store.node(e.dst).key, src.key);
    }

    for (auto id : store.nodes_with_label(GitIdentity)) {
        const auto email = get_text(store.node(id), "email");
        if (!email) continue;
        auto it = binding.find(normalize_email(*email));
        if (it == binding.end()) continue;
        if (auto u = store.find(GithubUser, it->second))
            result.edges_created += store.add_edge(id, RelType::LINKED_TO_GITHUB_USER, *u);
    }
    return result;
}

EnrichResult enrich_emails(GraphStore& store) {
    EnrichResult result;
    auto link = [&](NodeId holder, const std::string& raw) {
        const auto address = normalize_email(raw);
        if (address.empty()) return;
        const auto r = store.upsert(Email, address, {{"address", address}});
        result.nodes_created += r.created;
        result.edges_created += store.add_edge(holder, RelType::HAS_EMAIL, r.id);
    };
    for (auto id : store.nodes_with_label(GitIdentity))
        if (auto email = get_text(store.node(id), "email")) link(id, *email);
    for (auto id : store.nodes_with_label(GithubOrganization))
        if (auto email = get_text(store.node(id), "email")) link(id, *email);
    for (auto id : store.nodes_with_label(GithubUser))
        if (auto email = get_text(store.node(id), "email")) link(id, *email);
    for (auto id : store.nodes_with_label(GithubCommit)) {
        const auto n = store.node(id); // copy: link() may grow the node vector
        for (auto [email_prop, login_prop] : {std::pair{"author_email", "author_login"}, std::pair{"committer_email", "committer_login"}}) {
            auto email = get_text(n, email_prop);
            auto login = get_text(n, login_prop);
            if (!email || !login) continue;
            if (auto u = store.find(GithubUser, *login)) link(*u, *email);
        }
    }
    return result;
}

EnrichResult enrich_all(GraphStore& store) {
    EnrichResult result = enrich_repo_and_commits(store);
    result += enrich_emails(store);
    result += enrich_identity_links(store);
    return result;
}

} // namespace personagraph
