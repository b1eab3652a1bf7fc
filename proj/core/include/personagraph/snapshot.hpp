#pragma once

#include "personagraph/timestamp.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace personagraph {

inline constexpr int kSnapshotSchemaVersion = 1;

// Absent logins (deleted or "ghost" accounts) are nullopt throughout.
using Login = std::optional<std::string>;

struct RepositoryMeta {
    std::string owner;
    std::string name;
    std::optional<Timestamp> created_at;
    std::string owner_type = "User"; // "User" or "Organization"
    std::optional<std::string> owner_email;
    std::string default_branch;

    std::string key() const { return owner + "/" + name; }
    friend bool operator==(const RepositoryMeta&, const RepositoryMeta&) = default;
};

struct ContentEdit {
    std::string id;
    Login editor_login;
    std::optional<Timestamp> edited_at;
    friend bool operator==(const ContentEdit&, const ContentEdit&) = default;
};

struct Comment {
    std::string id;
    Login author_login;
    std::optional<Timestamp> created_at;
    friend bool operator==(const Comment&, const Comment&) = default;
};

struct ReviewComment {
    std::string id;
    Login author_login;
    std::optional<Timestamp> created_at;
    std::optional<std::string> review_id;
    friend bool operator==(const ReviewComment&, const ReviewComment&) = default;
};

struct Review {
    std::string id;
    Login author_login;
    std::optional<Timestamp> submitted_at;
    std::string state; // APPROVED, COMMENTED, CHANGES_REQUESTED, DISMISSED, PENDING
    friend bool operator==(const Review&, const Review&) = default;
};

struct PullRequest {
    std::int64_t number = 0;
    std::string id;
    Login author_login;
    std::optional<Timestamp> created_at;
    Login merged_by_login;
    std::optional<Timestamp> merged_at;
    std::string base_ref;
    std::vector<Review> reviews;
    std::vector<ReviewComment> review_comments;
    std::vector<ContentEdit> content_edits;
    friend bool operator==(const PullRequest&, const PullRequest&) = default;
};

struct Issue {
    std::int64_t number = 0;
    std::string id;
    Login author_login;
    std::optional<Timestamp> created_at;
    std::vector<Comment> comments;
    std::vector<ContentEdit> content_edits;
    friend bool operator==(const Issue&, const Issue&) = default;
};

using Discussion = Issue;

struct GitActor {
    std::string name;
    std::string email;
    Login user_login;
    friend bool operator==(const GitActor&, const GitActor&) = default;
};

struct SnapshotCommit {
    std::string sha;
    Timestamp authored_at;
    Timestamp committed_at;
    GitActor author;
    GitActor committer;
    friend bool operator==(const SnapshotCommit&, const SnapshotCommit&) = default;
};

struct CommitComment {
    std::string id;
    std::string commit_sha;
    Login author_login;
    std::optional<Timestamp> created_at;
    friend bool operator==(const CommitComment&, const CommitComment&) = default;
};

struct SnapshotUser {
    std::string login;
    std::optional<Timestamp> created_at;
    std::vector<std::string> emails_seen;
    std::vector<std::string> organizations;
    friend bool operator==(const SnapshotUser&, const SnapshotUser&) = default;
};

/// Email address bound to a login by a dedicated lookup rather than by a
/// collected commit.
struct EmailBinding {
    std::string email;
    std::string login;
    friend bool operator==(const EmailBinding&, const EmailBinding&) = default;
};

struct RepoSnapshot {
    int schema_version = kSnapshotSchemaVersion;
    RepositoryMeta repository;
    Timestamp collected_at{};
    std::vector<PullRequest> pull_requests;
    std::vector<Issue> issues;
    std::vector<Discussion> discussions;
    std::vector<SnapshotCommit> commits;
    std::vector<CommitComment> commit_comments;
    std::vector<SnapshotUser> users;
    std::vector<EmailBinding> email_bindings;
    friend bool operator==(const RepoSnapshot&, const RepoSnapshot&) = default;
};

nlohmann::json repository_to_json(const RepositoryMeta& meta);
RepositoryMeta repository_from_json(const nlohmann::json& j);

nlohmann::json snapshot_to_json(const RepoSnapshot& snapshot);

/// Rejects unsupported schema versions (Error(Version)) and missing required
/// fields (Error(Parse) naming the JSON path). Unknown fields are ignored.
RepoSnapshot snapshot_from_json(const nlohmann::json& j);

std::string dump_snapshot(const RepoSnapshot& snapshot);
void save_snapshot(const RepoSnapshot& snapshot, const std::filesystem::path& path);
RepoSnapshot load_snapshot(const std::filesystem::path& path);

/// Every login referenced by an entity of the snapshot, sorted.
std::vector<std::string> referenced_logins(const RepoSnapshot& snapshot);

} // namespace personagraph
