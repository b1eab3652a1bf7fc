#pragma once

#include "personagraph/analytics.hpp"
#include "personagraph/report.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace personagraph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSuspended = 3;

struct RepositoryInput {
    std::string repository; // owner/name
    std::optional<std::filesystem::path> snapshot;
    std::optional<std::filesystem::path> clone;
    std::optional<std::filesystem::path> commits; // serialized commit stream, instead of a clone
    friend bool operator==(const RepositoryInput&, const RepositoryInput&) = default;
};

struct RunConfig {
    std::vector<RepositoryInput> repositories;
    DetectorParams params;
    ReportFormat format = ReportFormat::Markdown;
    bool anonymize = false;
    std::set<std::string> allowlist;
    std::optional<std::filesystem::path> store;
    std::optional<std::filesystem::path> offline_replay;
    std::optional<std::filesystem::path> output;
    std::int64_t budget_points = 5000;
    int batch_size = 100;
    bool resolve_emails = true;
    std::optional<Timestamp> collected_at;
};

/// Relative paths resolve against `base_dir`. Throws Error(Config).
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Where a suspended collection of `snapshot` keeps its resumable state.
std::filesystem::path partial_state_path(const std::filesystem::path& snapshot);

struct CliEnvironment {
    std::optional<std::string> forge_token;
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliEnvironment& env = {});

} // namespace personagraph
