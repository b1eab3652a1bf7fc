#include "personagraph/analytics.hpp"

#include "personagraph/error.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace personagraph {

namespace {

using enum NodeLabel;

std::optional<std::string> single_login(const GraphStore& store, NodeId entity, RelType rel) {
    std::optional<std::string> best;
    for (auto u : store.out_neighbors(entity, rel)) {
        const auto& key = store.node(u).key;
        if (!best || key < *best) best = key;
    }
    return best;
}

NodeId require_repository(const GraphStore& store, std::string_view repository) {
    auto repo = store.find(GithubRepository, repository);
    if (!repo) throw Error(ErrorKind::NotFound, "repository " + std::string(repository) + " is not in the store");
    return *repo;
}

struct AuthoredCommit {
    Timestamp authored_at;
    std::optional<std::string> login;
};

std::vector<AuthoredCommit> repository_commits(const GraphStore& store, std::string_view repository) {
    const auto repo = require_repository(store, repository);
    std::vector<AuthoredCommit> out;
    for (auto git_repo : store.out_neighbors(repo, RelType::IS_GIT_REPOSITORY)) {
        for (auto commit : store.out_neighbors(git_repo, RelType::HAS_GIT_COMMIT)) {
            const auto& node = store.node(commit);
            const auto at = get_timestamp(node, "authored_at");
            if (!at) continue;
            std::optional<std::string> login;
            for (auto identity : store.out_neighbors(commit, RelType::GIT_AUTHORED_BY)) {
                auto l = single_login(store, identity, RelType::LINKED_TO_GITHUB_USER);
                if (l && (!login || *l < *login)) login = l;
            }
            out.push_back({*at, std::move(login)});
        }
    }
    return out;
}

} // namespace

std::int64_t duration_to_floor_months(Duration d) {
    if (d.count() < 0) throw Error(ErrorKind::Domain, "negative duration has no month count");
    return d.count() / kSecondsPerMonth;
}

double commit_share_pct(std::int64_t user_commits, std::int64_t repo_commits) {
    if (repo_commits <= 0) return 0.0;
    return 100.0 * static_cast<double>(user_commits) / static_cast<double>(repo_commits);
}

double presence_pct(Duration user_span, Duration repo_span) {
    if (repo_span.count() <= 0) return 0.0;
    const double pct = 100.0 * static_cast<double>(user_span.count()) / static_cast<double>(repo_span.count());
    return std::clamp(pct, 0.0, 100.0);
}

std::vector<ContributorRepoStats> contributor_stats(const GraphStore& store, std::string_view repository) {
    const auto commits = repository_commits(store, repository);
    if (commits.empty()) return {};

    Timestamp repo_first = commits.front().authored_at;
    Timestamp repo_last = repo_first;
    struct Acc {
        Timestamp first, last;
        std::int64_t count = 0;
    };
    std::map<std::string, Acc> per_user;
    for (const auto& c : commits) {
        repo_first = std::min(repo_first, c.authored_at);
        repo_last = std::max(repo_last, c.authored_at);
        if (!c.login) continue;
        auto [it, inserted] = per_user.try_emplace(*c.login, Acc{c.authored_at, c.authored_at, 0});
        it->second.first = std::min(it->second.first, c.authored_at);
        it->second.last = std::max(it->second.last, c.authored_at);
        ++it->second.count;
    }

    const auto repo_count = static_cast<std::int64_t>(commits.size());
    std::vector<ContributorRepoStats> out;
    for (const auto& [login, acc] : per_user) {
        ContributorRepoStats s;
        s.user_login = login;
        s.repository_key = std::string(repository);
        s.user_first_authored_at = acc.first;
        s.user_last_authored_at = acc.last;
        s.repo_first_authored_at = repo_first;
        s.repo_last_authored_at = repo_last;
        s.user_commit_count = acc.count;
        s.repo_commit_count = repo_count;
        s.commit_share_pct = commit_share_pct(acc.count, repo_count);
        s.presence_pct = presence_pct(acc.last - acc.first, repo_last - repo_first);
        s.repo_age_at_first_contribution = acc.first - repo_first;
        out.push_back(std::move(s));
    }
    return out;
}

std::int64_t unlinked_commit_count(const GraphStore& store, std::string_view repository) {
    const auto commits = repository_commits(store, repository);
    return std::count_if(commits.begin(), commits.end(), [](const AuthoredCommit& c) { return !c.login; });
}

std::map<std::string, std::vector<SelfMergeEvent>> self_merge_events(const GraphStore& store, std::string_view repository,
                                                                     ReviewPolicy policy) {
    const auto repo = require_repository(store, repository);
    std::map<std::string, std::vector<SelfMergeEvent>> events;
    for (auto pr : store.out_neighbors(repo, RelType::HAS_GITHUB_PULL_REQUEST)) {
        const auto& node = store.node(pr);
        const auto merged_at = get_timestamp(node, "merged_at");
        if (!merged_at) continue;
        const auto author = single_login(store, pr, RelType::AUTHORED_BY);
        const auto merger = single_login(store, pr, RelType::MERGED_BY);
        if (!author || !merger || *author != *merger) continue;

        bool reviewed = false;
        for (auto review : store.out_neighbors(pr, RelType::HAS_REVIEW)) {
            const auto reviewer = single_login(store, review, RelType::AUTHORED_BY);
            if (reviewer && *reviewer == *author) continue; // self-review
            if (policy == ReviewPolicy::ApprovedOnly && get_text(store.node(review), "state") != "APPROVED") continue;
            reviewed = true;
            break;
        }
        if (reviewed) continue;
        events[*author].push_back({node.key, *merged_at, *author, get_text(node, "base_ref").value_or("")});
    }
    for (auto& [login, list] : events)
        std::sort(list.begin(), list.end(), [](const SelfMergeEvent& a, const SelfMergeEvent& b) {
            return std::tie(a.merged_at, a.pr_key) < std::tie(b.merged_at, b.pr_key);
        });
    return events;
}

void DetectorParams::validate() const {
    if (!analysis_date) throw Error(ErrorKind::Validation, "analysis date is required");
    if (max_contributor_age_months <= 0 || lookback_years <= 0 || !(min_share_pct > 0) || !(max_presence_pct > 0))
        throw Error(ErrorKind::Validation, "detector thresholds must be positive");
}

Timestamp DetectorParams::lookback_cutoff() const {
    validate();
    return subtract_years(*analysis_date, lookback_years);
}

std::vector<std::string> account_emails(const GraphStore& store, NodeId user) {
    std::set<std::string> out;
    for (auto e : store.out_neighbors(user, RelType::HAS_EMAIL)) out.insert(store.node(e).key);
    for (auto identity : store.in_neighbors(user, RelType::LINKED_TO_GITHUB_USER)) {
        for (auto e : store.out_neighbors(identity, RelType::HAS_EMAIL)) out.insert(store.node(e).key);
    }
    return {out.begin(), out.end()};
}

std::vector<std::string> repository_keys(const GraphStore& store) {
    std::vector<std::string> keys;
    for (auto id : store.nodes_with_label(GithubRepository)) keys.push_back(store.node(id).key);
    std::sort(keys.begin(), keys.end());
    return keys;
}

std::vector<SelfMergeFinding> detect_self_merge(const GraphStore& store, const DetectorParams& params) {
    const auto cutoff = params.lookback_cutoff();
    const Duration max_age{params.max_contributor_age_months * kSecondsPerMonth};
    std::vector<SelfMergeFinding> findings;
    for (const auto& repo : repository_keys(store)) {
        std::map<std::string, ContributorRepoStats> stats;
        for (auto& s : contributor_stats(store, repo)) stats.emplace(s.user_login, std::move(s));
        for (const auto& [login, events] : self_merge_events(store, repo, params.review_policy)) {
            auto st = stats.find(login);
            if (st == stats.end()) continue; // no authored commit, age undefined
            const auto& first = events.front();
            const Duration age = first.merged_at - st->second.user_first_authored_at;
            if (age.count() <= 0 || age >= max_age) continue;
            if (st->second.user_first_authored_at < cutoff) continue;

            SelfMergeFinding f;
            f.user_login = login;
            f.repository_key = repo;
            f.first_self_merge_at = first.merged_at;
            f.first_self_merge_pr = first.pr_key;
            f.target_branch = first.base_ref;
            f.contributor_age = age;
            f.contributor_age_months = duration_to_floor_months(age);
            f.self_merge_count = static_cast<std::int64_t>(events.size());
            f.stats = st->second;
            if (auto user = store.find(GithubUser, login)) {
                f.user_created_at = get_timestamp(store.node(*user), "created_at");
                f.emails = account_emails(store, *user);
            }
            findings.push_back(std::move(f));
        }
    }
    std::sort(findings.begin(), findings.end(), [](const SelfMergeFinding& a, const SelfMergeFinding& b) {
        return std::tie(a.contributor_age, a.repository_key, a.user_login) <
               std::tie(b.contributor_age, b.repository_key, b.user_login);
    });
    return findings;
}

std::vector<SharePresenceFinding> detect_share_presence(const GraphStore& store, const DetectorParams& params) {
    const auto cutoff = params.lookback_cutoff();
    std::vector<SharePresenceFinding> findings;
    for (const auto& repo : repository_keys(store)) {
        for (auto& s : contributor_stats(store, repo)) {
            if (s.repo_last_authored_at == s.repo_first_authored_at) continue; // degenerate history
            if (!(s.commit_share_pct > params.min_share_pct) || !(s.presence_pct < params.max_presence_pct)) continue;
            if (s.user_first_authored_at < cutoff) continue;
            SharePresenceFinding f;
            f.user_login = s.user_login;
            f.repository_key = repo;
            f.commit_share_pct = s.commit_share_pct;
            f.presence_pct = s.presence_pct;
            if (auto user = store.find(GithubUser, s.user_login)) {
                f.user_created_at = get_timestamp(store.node(*user), "created_at");
                f.emails = account_emails(store, *user);
            }
            f.stats = std::move(s);
            findings.push_back(std::move(f));
        }
    }
    std::sort(findings.begin(), findings.end(), [](const SharePresenceFinding& a, const SharePresenceFinding& b) {
        if (a.commit_share_pct != b.commit_share_pct) return a.commit_share_pct > b.commit_share_pct;
        return std::tie(a.repository_key, a.user_login) < std::tie(b.repository_key, b.user_login);
    });
    return findings;
}

} // namespace personagraph
