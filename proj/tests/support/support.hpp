#pragma once

// Shared fixtures, oracles and harness pieces for the unit and acceptance
// tests. Nothing here goes through the graph unless its name says so.

#include "personagraph/analytics.hpp"
#include "personagraph/collector.hpp"
#include "personagraph/git_extract.hpp"
#include "personagraph/graph_store.hpp"
#include "personagraph/ingest.hpp"
#include "personagraph/snapshot.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace pgtest {

using namespace personagraph;
namespace fs = std::filesystem;

Timestamp ts(std::string_view iso);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const noexcept { return path_; }
    fs::path operator/(std::string_view name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view bytes);

/// Deterministic 40-hex sha for (salt, index).
std::string fake_sha(std::string_view salt, std::uint64_t index);

// ---- datasets ----

struct RepoFixture {
    RepoSnapshot snapshot;
    std::vector<CommitRecord> commits; // newest first, like git log
};

struct Dataset {
    std::vector<RepoFixture> repos;
    Timestamp analysis_date{};
};

/// Ingests every snapshot and commit stream, then enriches.
GraphStore build_store(const Dataset& data, EnrichResult* enrich = nullptr);

/// Two repositories shaped after the published results: the xz persona
/// (10 months, 24 PRs, 17.38% / 12.47%) and two planted pcre2
/// contributors (2 months / 43 PRs / 6.91% / 4.66%; 7 months / 7 PRs).
Dataset replica_dataset();

inline constexpr std::string_view kPersonaLogin = "JiaT75";
inline constexpr std::string_view kPersonaEmail = "jiat0218@gmail.com";
inline constexpr std::string_view kPlantedA = "pcre-newcomer-a";
inline constexpr std::string_view kPlantedB = "pcre-returning-b";
inline constexpr std::string_view kXz = "tukaani-project/xz";
inline constexpr std::string_view kPcre2 = "PCRE2Project/pcre2";

struct RandomLimits {
    int max_commits = 500;
    int max_users = 40;
    int max_prs = 60;
    int max_repos = 2;
};

/// Random multi-repository dataset with case-varied emails, unlinked
/// identities, ghost reviewers and self-reviews. Email bindings never
/// conflict.
Dataset random_dataset(std::uint64_t seed, const RandomLimits& limits = {});

// ---- brute-force oracles (raw records only) ----

/// normalized email -> login, first binding wins, snapshot commits before
/// explicit bindings.
std::map<std::string, std::string> oracle_bindings(const Dataset& data);

struct OracleStats {
    std::string login;
    std::string repository;
    Timestamp user_first, user_last, repo_first, repo_last;
    std::int64_t user_commits = 0;
    std::int64_t repo_commits = 0;
    double share = 0;
    double presence = 0;
};

std::vector<OracleStats> oracle_stats(const Dataset& data, std::string_view repository);

struct OracleSelfMerge {
    std::string login;
    std::string repository;
    Timestamp first_merge;
    std::int64_t count = 0;
    std::int64_t age_seconds = 0;
    std::int64_t months = 0;
    friend bool operator==(const OracleSelfMerge&, const OracleSelfMerge&) = default;
};

std::vector<OracleSelfMerge> oracle_self_merge(const Dataset& data, const DetectorParams& params);

struct OracleShare {
    std::string login;
    std::string repository;
    double share = 0;
    double presence = 0;
    friend bool operator==(const OracleShare&, const OracleShare&) = default;
};

std::vector<OracleShare> oracle_share_presence(const Dataset& data, const DetectorParams& params);

/// Compares every stats field and both finding sets. Returns one line per
/// discrepancy.
std::vector<std::string> compare_with_oracle(const Dataset& data, const GraphStore& store, const DetectorParams& params);

// ---- replay harness ----

struct ReplayOptions {
    int batch_size = 100;
    std::int64_t page_cost = 1;
};

/// Writes the exchanges a collector would see for `truth` (totals plus every
/// page at the given batch size) into `dir`.
void write_replay(const RepoSnapshot& truth, const fs::path& dir, const ReplayOptions& options = {});

/// In-memory transport backed by a function.
class FunctionTransport : public Transport {
public:
    explicit FunctionTransport(std::function<TransportResponse(const GraphQLRequest&)> fn) : fn_(std::move(fn)) {}
    TransportResponse execute(const GraphQLRequest& request) override {
        log.push_back(request);
        return fn_(request);
    }
    std::vector<GraphQLRequest> log;

private:
    std::function<TransportResponse(const GraphQLRequest&)> fn_;
};

// ---- git repositories ----

struct GitCommitSpec {
    std::string author_name, author_email;
    Timestamp authored_at;
    std::string committer_name, committer_email;
    Timestamp committed_at;
    std::vector<int> parents; // indices of earlier specs; empty for a root
    std::string branch = "main";
};

/// Builds a repository with `git fast-import` and returns the sha of every
/// spec in order. HEAD points at `head_branch`.
std::vector<std::string> build_git_repo(const fs::path& dir, const std::vector<GitCommitSpec>& specs,
                                        const std::string& head_branch = "main", bool bare = false);

bool git_available();

} // namespace pgtest
