#pragma once

#include "personagraph/timestamp.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace personagraph {

enum class NodeLabel : std::uint8_t {
    GithubCommit,
    GithubCommitComment,
    GithubDiscussion,
    GithubDiscussionComment,
    GithubIssue,
    GithubIssueComment,
    GithubOrganization,
    GithubPullRequest,
    GithubPullRequestReview,
    GithubPullRequestReviewComment,
    GithubRepository,
    GithubUser,
    GithubUserContentEdit,
    GitBranch,
    GitCommit,
    GitIdentity,
    GitRepository,
    Email,
};
inline constexpr std::size_t kNodeLabelCount = 18;

enum class RelType : std::uint8_t {
    // containment
    HAS_GITHUB_PULL_REQUEST,
    HAS_GITHUB_ISSUE,
    HAS_GITHUB_DISCUSSION,
    HAS_GITHUB_COMMIT,
    HAS_COMMENT,
    HAS_REVIEW,
    HAS_REVIEW_COMMENT,
    HAS_CONTENT_EDIT,
    HAS_GIT_BRANCH,
    HAS_GIT_COMMIT,
    // actors
    AUTHORED_BY,
    MERGED_BY,
    REVIEWED_BY,
    MEMBER_OF,
    // enrichment
    IS_GIT_REPOSITORY,
    IS_GIT_COMMIT,
    LINKED_TO_GITHUB_USER,
    HAS_EMAIL,
    // raw commits
    GIT_AUTHORED_BY,
    GIT_COMMITTED_BY,
    HAS_PARENT,
};
inline constexpr std::size_t kRelTypeCount = 21;

std::string_view to_string(NodeLabel label) noexcept;
std::string_view to_string(RelType rel) noexcept;
std::optional<NodeLabel> parse_node_label(std::string_view text) noexcept;
std::optional<RelType> parse_rel_type(std::string_view text) noexcept;

std::span<const NodeLabel> all_node_labels() noexcept;
std::span<const RelType> all_rel_types() noexcept;

/// Fixed (source-label set, target-label set) admitted by a relationship type.
bool admits(RelType rel, NodeLabel src, NodeLabel dst) noexcept;

using PropertyValue = std::variant<std::string, std::int64_t, bool, Timestamp>;
using PropertyMap = std::map<std::string, PropertyValue, std::less<>>;

/// Dense handle into one GraphStore. Only meaningful for the store that
/// issued it.
struct NodeId {
    std::uint32_t value = 0;
    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct Node {
    NodeLabel label;
    std::string key;
    PropertyMap properties;
};

struct Edge {
    NodeId src;
    RelType rel;
    NodeId dst;
    friend bool operator==(const Edge&, const Edge&) = default;
};

enum class Mutation { NodeUpsert, EdgeInsert };

/// Outcome of an upsert, so callers can keep created/updated statistics.
struct UpsertResult {
    NodeId id;
    bool created = false;
};

/// In-memory labeled property graph keyed by (label, natural key).
///
/// Single writer. Readers may share a const store once mutation is done.
/// The store is a plain value: move it between threads as a whole.
class GraphStore {
public:
    GraphStore() = default;

    UpsertResult upsert(NodeLabel label, std::string_view key, const PropertyMap& properties = {});
    NodeId upsert_node(NodeLabel label, std::string_view key, const PropertyMap& properties = {}) {
        return upsert(label, key, properties).id;
    }

    /// Returns false when the triple already exists.
    bool add_edge(NodeId src, RelType rel, NodeId dst);
    bool has_edge(NodeId src, RelType rel, NodeId dst) const;

    std::optional<NodeId> find(NodeLabel label, std::string_view key) const;
    const Node& node(NodeId id) const;

    std::vector<NodeId> out_neighbors(NodeId id, RelType rel) const;
    std::vector<NodeId> in_neighbors(NodeId id, RelType rel) const;
    std::vector<NodeId> nodes_with_label(NodeLabel label) const;

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::size_t count(NodeLabel label) const noexcept {
        return by_key_[static_cast<std::size_t>(label)].size();
    }
    std::size_t count(RelType rel) const noexcept { return rel_counts_[static_cast<std::size_t>(rel)]; }

    /// Insertion-ordered views.
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// Test instrumentation: called after every effective mutation attempt.
    void set_mutation_observer(std::function<void(Mutation)> observer) { observer_ = std::move(observer); }

private:
    struct EdgeHash {
        std::size_t operator()(const Edge& e) const noexcept;
    };

    void check(NodeId id) const;

    std::vector<Node> nodes_;
    std::array<std::unordered_map<std::string, NodeId>, kNodeLabelCount> by_key_;
    std::vector<Edge> edges_;
    std::unordered_set<Edge, EdgeHash> edge_set_;
    std::vector<std::vector<std::uint32_t>> out_edges_;
    std::vector<std::vector<std::uint32_t>> in_edges_;
    std::array<std::size_t, kRelTypeCount> rel_counts_{};
    std::function<void(Mutation)> observer_;
};

/// Property helpers; return nullopt when absent or of a different type.
std::optional<std::string> get_text(const Node& node, std::string_view name);
std::optional<std::int64_t> get_integer(const Node& node, std::string_view name);
std::optional<bool> get_bool(const Node& node, std::string_view name);
std::optional<Timestamp> get_timestamp(const Node& node, std::string_view name);

/// Canonical JSON of a property map: sorted keys, no whitespace. Timestamps
/// are encoded as {"ts":"YYYY-MM-DDThh:mm:ssZ"} to keep them distinct from text.
std::string properties_to_json(const PropertyMap& properties);
PropertyMap properties_from_json(std::string_view json);

/// Line-oriented persistence (`graphstore v1`).
void write_graph(const GraphStore& store, std::ostream& out);
GraphStore read_graph(std::istream& in);
void save_graph(const GraphStore& store, const std::filesystem::path& path);
GraphStore load_graph(const std::filesystem::path& path);

} // namespace personagraph
