#pragma once

#include "personagraph/timestamp.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace personagraph {

struct IdentityRecord {
    std::string name;
    std::string email;

    /// Identity key: trimmed name and email, `name <email>`.
    std::string key() const;
    friend bool operator==(const IdentityRecord&, const IdentityRecord&) = default;
};

struct CommitRecord {
    std::string sha;
    std::string author_name;
    std::string author_email;
    Timestamp authored_at;
    std::string committer_name;
    std::string committer_email;
    Timestamp committed_at;
    std::vector<std::string> parent_shas;

    IdentityRecord author() const { return {author_name, author_email}; }
    IdentityRecord committer() const { return {committer_name, committer_email}; }
    friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

struct BranchRecord {
    std::string name;
    std::string head_sha;
    bool is_default = false;
    friend bool operator==(const BranchRecord&, const BranchRecord&) = default;
};

inline constexpr char kRecordSeparator = '\x1e';
inline constexpr char kFieldSeparator = '\x1f';

bool is_sha(std::string_view text) noexcept;

/// Canonical commit-stream encoding (0x1E between records, 0x1F between fields).
std::string serialize_commit_stream(const std::vector<CommitRecord>& records);

/// Strict inverse of serialize_commit_stream. Throws Error(Parse) naming the
/// zero-based record index.
std::vector<CommitRecord> parse_commit_stream(std::string_view stream);

std::vector<CommitRecord> read_commit_stream_file(const std::filesystem::path& path);
void write_commit_stream_file(const std::vector<CommitRecord>& records, const std::filesystem::path& path);

/// Every commit reachable from the default branch head of the clone at
/// `clone_path`, newest first. Shells out to `git`.
std::vector<CommitRecord> extract_commit_stream(const std::filesystem::path& clone_path);

/// Local branches with the one HEAD points at flagged as default.
std::vector<BranchRecord> list_branches(const std::filesystem::path& clone_path);

} // namespace personagraph
