#pragma once

#include "personagraph/analytics.hpp"
#include "personagraph/graph_store.hpp"
#include "personagraph/ingest.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace personagraph {

struct ReportParams {
    std::int64_t max_contributor_age_months = 0;
    int lookback_years = 0;
    double min_share_pct = 0.0;
    double max_presence_pct = 0.0;
    std::string review_policy; // "any" | "approved"
    std::string lookback_cutoff;
    friend bool operator==(const ReportParams&, const ReportParams&) = default;
};

struct DatasetSummary {
    std::vector<std::string> repositories;
    std::int64_t github_users = 0;
    std::int64_t pull_requests = 0;
    std::int64_t git_commits = 0;
    std::int64_t git_identities = 0;
    std::int64_t linked_identities = 0;
    std::int64_t unlinked_commits = 0;
    std::int64_t stats_rows = 0;
    friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

struct SelfMergeRow {
    std::string name;
    std::string repository;
    std::int64_t contributor_age_months = 0;
    std::int64_t self_merged_prs = 0;
    std::string first_self_merge_at;
    std::string first_self_merge_pr;
    std::string target_branch;
    std::string first_authored_at;
    std::string user_created_at; // empty when unknown
    std::vector<std::string> emails;
    friend bool operator==(const SelfMergeRow&, const SelfMergeRow&) = default;
};

struct SharePresenceRow {
    std::string name;
    std::string repository;
    double authored_pct = 0.0;
    double presence_pct = 0.0;
    std::int64_t user_commits = 0;
    std::int64_t repo_commits = 0;
    std::string first_authored_at;
    std::string last_authored_at;
    std::string user_created_at;
    std::vector<std::string> emails;
    friend bool operator==(const SharePresenceRow&, const SharePresenceRow&) = default;
};

struct Report {
    std::string analysis_date;
    ReportParams params;
    DatasetSummary dataset;
    std::vector<SelfMergeRow> self_merge;
    std::vector<SharePresenceRow> share_presence;
    std::vector<BindingConflict> warnings;
    bool anonymized = false;
    friend bool operator==(const Report&, const Report&) = default;
};

/// Runs both detectors over the store and assembles the report.
Report build_report(const GraphStore& store, const DetectorParams& params,
                    const std::vector<BindingConflict>& warnings = {});

/// "Contributor A" .. "Contributor Z", "Contributor AA", ...
std::string pseudonym(std::size_t index);

inline constexpr std::string_view kRedacted = "[redacted]";

/// Replaces every login outside the allowlist with a pseudonym assigned by
/// first appearance (self-merge rows, share rows, then warnings) and redacts
/// the emails listed for those logins wherever they occur.
Report anonymize(const Report& report, const std::set<std::string>& allowlist);

enum class ReportFormat { Markdown, Csv, Json };

std::optional<ReportFormat> parse_report_format(std::string_view text) noexcept;
std::string_view to_string(ReportFormat format) noexcept;

nlohmann::json report_to_json(const Report& report);
/// Throws Error(Parse) on a malformed document.
Report report_from_json(const nlohmann::json& j);

std::string render(const Report& report, ReportFormat format);

} // namespace personagraph
