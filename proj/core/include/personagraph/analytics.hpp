#pragma once

#include "personagraph/graph_store.hpp"
#include "personagraph/timestamp.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace personagraph {

/// 30.4375 days, the mean Gregorian month.
inline constexpr std::int64_t kSecondsPerMonth = 2'629'800;

/// floor(days / 30.4375). Throws Error(Domain) for negative durations.
std::int64_t duration_to_floor_months(Duration d);

struct ContributorRepoStats {
    std::string user_login;
    std::string repository_key;
    Timestamp user_first_authored_at;
    Timestamp user_last_authored_at;
    Timestamp repo_first_authored_at;
    Timestamp repo_last_authored_at;
    std::int64_t user_commit_count = 0;
    std::int64_t repo_commit_count = 0;
    double commit_share_pct = 0.0;
    double presence_pct = 0.0;
    Duration repo_age_at_first_contribution{};

    friend bool operator==(const ContributorRepoStats&, const ContributorRepoStats&) = default;
};

/// 100 * user / repo; 0 when the repository has no commits.
double commit_share_pct(std::int64_t user_commits, std::int64_t repo_commits);

/// 100 * user span / repo span clamped to [0, 100]; 0 for a zero repo span.
double presence_pct(Duration user_span, Duration repo_span);

/// One row per GithubUser with at least one authored GitCommit in the
/// repository, attributed through GIT_AUTHORED_BY and LINKED_TO_GITHUB_USER.
/// Sorted by login. Throws Error(NotFound) if the repository is absent.
std::vector<ContributorRepoStats> contributor_stats(const GraphStore& store, std::string_view repository);

/// Commits whose author identity is not linked to any account.
std::int64_t unlinked_commit_count(const GraphStore& store, std::string_view repository);

enum class ReviewPolicy {
    AnyReview,    // any review by another account prevents a self-merge event
    ApprovedOnly, // only an APPROVED review by another account does
};

struct SelfMergeEvent {
    std::string pr_key;
    Timestamp merged_at;
    std::string login; // author and merger
    std::string base_ref;
    friend bool operator==(const SelfMergeEvent&, const SelfMergeEvent&) = default;
};

/// Merged pull requests whose merger is their author and that carry no
/// qualifying review by anyone else, grouped by login, ascending merge time.
std::map<std::string, std::vector<SelfMergeEvent>> self_merge_events(const GraphStore& store, std::string_view repository,
                                                                     ReviewPolicy policy = ReviewPolicy::AnyReview);

struct DetectorParams {
    std::int64_t max_contributor_age_months = 24;
    int lookback_years = 4;
    double min_share_pct = 5.0;
    double max_presence_pct = 20.0;
    std::optional<Timestamp> analysis_date; // required; never defaults to the wall clock
    ReviewPolicy review_policy = ReviewPolicy::AnyReview;

    /// Throws Error(Validation) for non-positive thresholds or a missing date.
    void validate() const;
    /// analysis_date minus lookback_years (calendar).
    Timestamp lookback_cutoff() const;
};

struct SelfMergeFinding {
    std::string user_login;
    std::string repository_key;
    Timestamp first_self_merge_at;
    std::string first_self_merge_pr;
    std::string target_branch;
    Duration contributor_age{};
    std::int64_t contributor_age_months = 0;
    std::int64_t self_merge_count = 0;
    ContributorRepoStats stats;
    std::optional<Timestamp> user_created_at;
    std::vector<std::string> emails;

    friend bool operator==(const SelfMergeFinding&, const SelfMergeFinding&) = default;
};

struct SharePresenceFinding {
    std::string user_login;
    std::string repository_key;
    double commit_share_pct = 0.0;
    double presence_pct = 0.0;
    ContributorRepoStats stats;
    std::optional<Timestamp> user_created_at;
    std::vector<std::string> emails;

    friend bool operator==(const SharePresenceFinding&, const SharePresenceFinding&) = default;
};

/// Users whose first unreviewed self-merge came 0 < age < max months after
/// their first authored commit, which itself falls within the lookback
/// window. Ascending by age.
std::vector<SelfMergeFinding> detect_self_merge(const GraphStore& store, const DetectorParams& params);

/// Rows with share > min_share, presence < max_presence and first authored
/// commit within the lookback window. Descending by share.
std::vector<SharePresenceFinding> detect_share_presence(const GraphStore& store, const DetectorParams& params);

/// Every address linked to the account: its own HAS_EMAIL edges and those of
/// identities linked to it. Sorted.
std::vector<std::string> account_emails(const GraphStore& store, NodeId user);

/// Keys of all GithubRepository nodes, sorted.
std::vector<std::string> repository_keys(const GraphStore& store);

} // namespace personagraph
