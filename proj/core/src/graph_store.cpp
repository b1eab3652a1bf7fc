#include "personagraph/graph_store.hpp"

#include "personagraph/error.hpp"
#include "text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace personagraph {

namespace {

constexpr std::array<NodeLabel, kNodeLabelCount> kLabels = {
    NodeLabel::GithubCommit,
    NodeLabel::GithubCommitComment,
    NodeLabel::GithubDiscussion,
    NodeLabel::GithubDiscussionComment,
    NodeLabel::GithubIssue,
    NodeLabel::GithubIssueComment,
    NodeLabel::GithubOrganization,
    NodeLabel::GithubPullRequest,
    NodeLabel::GithubPullRequestReview,
    NodeLabel::GithubPullRequestReviewComment,
    NodeLabel::GithubRepository,
    NodeLabel::GithubUser,
    NodeLabel::GithubUserContentEdit,
    NodeLabel::GitBranch,
    NodeLabel::GitCommit,
    NodeLabel::GitIdentity,
    NodeLabel::GitRepository,
    NodeLabel::Email,
};

constexpr std::array<std::string_view, kNodeLabelCount> kLabelNames = {
    "GithubCommit",
    "GithubCommitComment",
    "GithubDiscussion",
    "GithubDiscussionComment",
    "GithubIssue",
    "GithubIssueComment",
    "GithubOrganization",
    "GithubPullRequest",
    "GithubPullRequestReview",
    "GithubPullRequestReviewComment",
    "GithubRepository",
    "GithubUser",
    "GithubUserContentEdit",
    "GitBranch",
    "GitCommit",
    "GitIdentity",
    "GitRepository",
    "Email",
};

constexpr std::array<RelType, kRelTypeCount> kRels = {
    RelType::HAS_GITHUB_PULL_REQUEST,
    RelType::HAS_GITHUB_ISSUE,
    RelType::HAS_GITHUB_DISCUSSION,
    RelType::HAS_GITHUB_COMMIT,
    RelType::HAS_COMMENT,
    RelType::HAS_REVIEW,
    RelType::HAS_REVIEW_COMMENT,
    RelType::HAS_CONTENT_EDIT,
    RelType::HAS_GIT_BRANCH,
    RelType::HAS_GIT_COMMIT,
    RelType::AUTHORED_BY,
    RelType::MERGED_BY,
    RelType::REVIEWED_BY,
    RelType::MEMBER_OF,
    RelType::IS_GIT_REPOSITORY,
    RelType::IS_GIT_COMMIT,
    RelType::LINKED_TO_GITHUB_USER,
    RelType::HAS_EMAIL,
    RelType::GIT_AUTHORED_BY,
    RelType::GIT_COMMITTED_BY,
    RelType::HAS_PARENT,
};

constexpr std::array<std::string_view, kRelTypeCount> kRelNames = {
    "HAS_GITHUB_PULL_REQUEST",
    "HAS_GITHUB_ISSUE",
    "HAS_GITHUB_DISCUSSION",
    "HAS_GITHUB_COMMIT",
    "HAS_COMMENT",
    "HAS_REVIEW",
    "HAS_REVIEW_COMMENT",
    "HAS_CONTENT_EDIT",
    "HAS_GIT_BRANCH",
    "HAS_GIT_COMMIT",
    "AUTHORED_BY",
    "MERGED_BY",
    "REVIEWED_BY",
    "MEMBER_OF",
    "IS_GIT_REPOSITORY",
    "IS_GIT_COMMIT",
    "LINKED_TO_GITHUB_USER",
    "HAS_EMAIL",
    "GIT_AUTHORED_BY",
    "GIT_COMMITTED_BY",
    "HAS_PARENT",
};

using LabelMask = std::uint32_t;

constexpr LabelMask bit(NodeLabel l) { return LabelMask{1} << static_cast<unsigned>(l); }

template <typename... L>
constexpr LabelMask mask(L... ls) {
    return (bit(ls) | ...);
}

struct Signature {
    LabelMask src;
    LabelMask dst;
};

using enum NodeLabel;

// Indexed by RelType.
constexpr std::array<Signature, kRelTypeCount> kSignatures = {{
    {mask(GithubRepository), mask(GithubPullRequest)},
    {mask(GithubRepository), mask(GithubIssue)},
    {mask(GithubRepository), mask(GithubDiscussion)},
    {mask(GithubRepository), mask(GithubCommit)},
    {mask(GithubIssue, GithubDiscussion, GithubCommit),
     mask(GithubIssueComment, GithubDiscussionComment, GithubCommitComment)},
    {mask(GithubPullRequest), mask(GithubPullRequestReview)},
    {mask(GithubPullRequest, GithubPullRequestReview), mask(GithubPullRequestReviewComment)},
    {mask(GithubPullRequest, GithubIssue, GithubDiscussion, GithubIssueComment, GithubDiscussionComment),
     mask(GithubUserContentEdit)},
    {mask(GitRepository), mask(GitBranch)},
    {mask(GitRepository, GitBranch), mask(GitCommit)},
    {mask(GithubPullRequest, GithubIssue, GithubDiscussion, GithubIssueComment, GithubDiscussionComment,
          GithubCommitComment, GithubPullRequestReview, GithubPullRequestReviewComment, GithubUserContentEdit,
          GithubCommit),
     mask(GithubUser)},
    {mask(GithubPullRequest), mask(GithubUser)},
    {mask(GithubPullRequest), mask(GithubUser)},
    {mask(GithubUser), mask(GithubOrganization)},
    {mask(GithubRepository), mask(GitRepository)},
    {mask(GithubCommit), mask(GitCommit)},
    {mask(GitIdentity), mask(GithubUser)},
    {mask(GitIdentity, GithubUser, GithubOrganization), mask(Email)},
    {mask(GitCommit), mask(GitIdentity)},
    {mask(GitCommit), mask(GitIdentity)},
    {mask(GitCommit), mask(GitCommit)},
}};

std::size_t idx(NodeLabel l) { return static_cast<std::size_t>(l); }
std::size_t idx(RelType r) { return static_cast<std::size_t>(r); }

void validate_text(std::string_view what, std::string_view s) {
    if (!detail::is_valid_utf8(s))
        throw Error(ErrorKind::Validation, std::string(what) + " is not valid UTF-8");
}

nlohmann::json to_json_value(const PropertyValue& v) {
    return std::visit(
        [](const auto& x) -> nlohmann::json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Timestamp>)
                return nlohmann::json{{"ts", format_timestamp(x)}};
            else
                return x;
        },
        v);
}

PropertyValue from_json_value(const std::string& name, const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_object() && j.size() == 1 && j.contains("ts") && j["ts"].is_string()) {
        if (auto t = parse_timestamp_strict(j["ts"].get<std::string>())) return *t;
    }
    throw Error(ErrorKind::Parse, "property '" + name + "' has an unsupported value");
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& why) {
    throw Error(ErrorKind::Parse, "graph file line " + std::to_string(line) + ": " + why);
}

} // namespace

std::string_view to_string(NodeLabel label) noexcept { return kLabelNames[idx(label)]; }
std::string_view to_string(RelType rel) noexcept { return kRelNames[idx(rel)]; }

std::optional<NodeLabel> parse_node_label(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kNodeLabelCount; ++i)
        if (kLabelNames[i] == text) return kLabels[i];
    return std::nullopt;
}

std::optional<RelType> parse_rel_type(std::string_view text) noexcept {
    for (std::size_t i = 0; i < kRelTypeCount; ++i)
        if (kRelNames[i] == text) return kRels[i];
    return std::nullopt;
}

std::span<const NodeLabel> all_node_labels() noexcept { return kLabels; }
std::span<const RelType> all_rel_types() noexcept { return kRels; }

bool admits(RelType rel, NodeLabel src, NodeLabel dst) noexcept {
    const auto& sig = kSignatures[idx(rel)];
    return (sig.src & bit(src)) != 0 && (sig.dst & bit(dst)) != 0;
}

std::size_t GraphStore::EdgeHash::operator()(const Edge& e) const noexcept {
    std::uint64_t h = (std::uint64_t{e.src.value} << 32) ^ e.dst.value;
    h ^= std::uint64_t{static_cast<std::uint8_t>(e.rel)} * 0x9E3779B97F4A7C15ULL;
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
}

UpsertResult GraphStore::upsert(NodeLabel label, std::string_view key, const PropertyMap& properties) {
    if (idx(label) >= kNodeLabelCount) throw Error(ErrorKind::Schema, "unknown node label");
    if (key.empty()) throw Error(ErrorKind::Validation, std::string(to_string(label)) + ": empty natural key");
    if (key.find_first_of("\t\n\r") != std::string_view::npos)
        throw Error(ErrorKind::Validation, std::string(to_string(label)) + ": natural key contains a tab or newline");
    validate_text("natural key", key);
    for (const auto& [name, value] : properties) {
        if (name.empty()) throw Error(ErrorKind::Validation, "empty property name");
        validate_text("property name", name);
        if (const auto* s = std::get_if<std::string>(&value)) validate_text("property '" + name + "'", *s);
    }

    auto& index = by_key_[idx(label)];
    UpsertResult result;
    if (auto it = index.find(std::string(key)); it != index.end()) {
        result.id = it->second;
        auto& props = nodes_[it->second.value].properties;
        for (const auto& [name, value] : properties) props.insert_or_assign(name, value);
    } else {
        result.id = NodeId{static_cast<std::uint32_t>(nodes_.size())};
        result.created = true;
        nodes_.push_back(Node{label, std::string(key), properties});
        out_edges_.emplace_back();
        in_edges_.emplace_back();
        index.emplace(std::string(key), result.id);
    }
    if (observer_) observer_(Mutation::NodeUpsert);
    return result;
}

void GraphStore::check(NodeId id) const {
    if (id.value >= nodes_.size())
        throw Error(ErrorKind::Integrity, "dangling node reference #" + std::to_string(id.value));
}

bool GraphStore::add_edge(NodeId src, RelType rel, NodeId dst) {
    check(src);
    check(dst);
    if (idx(rel) >= kRelTypeCount) throw Error(ErrorKind::Schema, "unknown relationship type");
    const auto sl = nodes_[src.value].label;
    const auto dl = nodes_[dst.value].label;
    if (!admits(rel, sl, dl))
        throw Error(ErrorKind::Schema, std::string(to_string(rel)) + " does not admit " + std::string(to_string(sl)) +
                                           " -> " + std::string(to_string(dl)));
    const Edge e{src, rel, dst};
    const bool inserted = edge_set_.insert(e).second;
    if (inserted) {
        const auto edge_index = static_cast<std::uint32_t>(edges_.size());
        edges_.push_back(e);
        out_edges_[src.value].push_back(edge_index);
        in_edges_[dst.value].push_back(edge_index);
        ++rel_counts_[idx(rel)];
    }
    if (observer_) observer_(Mutation::EdgeInsert);
    return inserted;
}

bool GraphStore::has_edge(NodeId src, RelType rel, NodeId dst) const {
    return edge_set_.contains(Edge{src, rel, dst});
}

std::optional<NodeId> GraphStore::find(NodeLabel label, std::string_view key) const {
    const auto& index = by_key_[idx(label)];
    if (auto it = index.find(std::string(key)); it != index.end()) return it->second;
    return std::nullopt;
}

const Node& GraphStore::node(NodeId id) const {
    check(id);
    return nodes_[id.value];
}

std::vector<NodeId> GraphStore::out_neighbors(NodeId id, RelType rel) const {
    check(id);
    std::vector<NodeId> out;
    for (auto e : out_edges_[id.value])
        if (edges_[e].rel == rel) out.push_back(edges_[e].dst);
    return out;
}

std::vector<NodeId> GraphStore::in_neighbors(NodeId id, RelType rel) const {
    check(id);
    std::vector<NodeId> out;
    for (auto e : in_edges_[id.value])
        if (edges_[e].rel == rel) out.push_back(edges_[e].src);
    return out;
}

std::vector<NodeId> GraphStore::nodes_with_label(NodeLabel label) const {
    std::vector<NodeId> out;
    out.reserve(count(label));
    for (std::uint32_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].label == label) out.push_back(NodeId{i});
    return out;
}

std::optional<std::string> get_text(const Node& node, std::string_view name) {
    auto it = node.properties.find(name);
    if (it == node.properties.end()) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    return std::nullopt;
}

std::optional<std::int64_t> get_integer(const Node& node, std::string_view name) {
    auto it = node.properties.find(name);
    if (it == node.properties.end()) return std::nullopt;
    if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    return std::nullopt;
}

std::optional<bool> get_bool(const Node& node, std::string_view name) {
    auto it = node.properties.find(name);
    if (it == node.properties.end()) return std::nullopt;
    if (const auto* v = std::get_if<bool>(&it->second)) return *v;
    return std::nullopt;
}

std::optional<Timestamp> get_timestamp(const Node& node, std::string_view name) {
    auto it = node.properties.find(name);
    if (it == node.properties.end()) return std::nullopt;
    if (const auto* v = std::get_if<Timestamp>(&it->second)) return *v;
    return std::nullopt;
}

std::string properties_to_json(const PropertyMap& properties) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : properties) j[name] = to_json_value(value);
    return j.dump();
}

PropertyMap properties_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, std::string("properties: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Parse, "properties: expected a JSON object");
    PropertyMap out;
    for (const auto& [name, value] : j.items()) out.emplace(name, from_json_value(name, value));
    return out;
}

void write_graph(const GraphStore& store, std::ostream& out) {
    out << "graphstore v1\n";
    for (const auto& n : store.nodes())
        out << "N\t" << to_string(n.label) << '\t' << n.key << '\t' << properties_to_json(n.properties) << '\n';
    for (const auto& e : store.edges()) {
        const auto& s = store.node(e.src);
        const auto& d = store.node(e.dst);
        out << "E\t" << to_string(s.label) << '\t' << s.key << '\t' << to_string(e.rel) << '\t'
            << to_string(d.label) << '\t' << d.key << '\n';
    }
}

GraphStore read_graph(std::istream& in) {
    GraphStore store;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) parse_fail(1, "missing header");
    ++line_no;
    if (line.rfind("graphstore ", 0) != 0) parse_fail(1, "missing 'graphstore' header");
    if (line != "graphstore v1") throw Error(ErrorKind::Version, "unsupported graph file version '" + line.substr(11) + "'");

    auto label_of = [&](std::string_view text) {
        auto l = parse_node_label(text);
        if (!l) throw Error(ErrorKind::Schema, "graph file line " + std::to_string(line_no) + ": unknown label '" +
                                                   std::string(text) + "'");
        return *l;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (in.eof()) parse_fail(line_no, "record is not newline-terminated (truncated file?)");
        const auto fields = detail::split(line, '\t');
        if (fields.empty() || fields[0].empty()) parse_fail(line_no, "empty record");
        if (fields[0] == "N") {
            if (fields.size() != 4) parse_fail(line_no, "node record needs 4 fields, got " + std::to_string(fields.size()));
            const auto label = label_of(fields[1]);
            PropertyMap props;
            try {
                props = properties_from_json(fields[3]);
            } catch (const Error& e) {
                parse_fail(line_no, e.what());
            }
            if (store.find(label, fields[2])) parse_fail(line_no, "duplicate node");
            try {
                store.upsert(label, fields[2], props);
            } catch (const Error& e) {
                parse_fail(line_no, e.what());
            }
        } else if (fields[0] == "E") {
            if (fields.size() != 6) parse_fail(line_no, "edge record needs 6 fields, got " + std::to_string(fields.size()));
            const auto sl = label_of(fields[1]);
            const auto rel = parse_rel_type(fields[3]);
            if (!rel) throw Error(ErrorKind::Schema, "graph file line " + std::to_string(line_no) +
                                                         ": unknown relationship '" + std::string(fields[3]) + "'");
            const auto dl = label_of(fields[4]);
            const auto src = store.find(sl, fields[2]);
            const auto dst = store.find(dl, fields[5]);
            if (!src || !dst)
                throw Error(ErrorKind::Integrity,
                            "graph file line " + std::to_string(line_no) + ": edge endpoint not declared");
            if (!store.add_edge(*src, *rel, *dst)) parse_fail(line_no, "duplicate edge");
        } else {
            parse_fail(line_no, "unknown record type '" + std::string(fields[0]) + "'");
        }
    }
    return store;
}

void save_graph(const GraphStore& store, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Input, "cannot write graph file " + path.string());
    write_graph(store, out);
    out.flush();
    if (!out) throw Error(ErrorKind::Input, "failed writing graph file " + path.string());
}

GraphStore load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Input, "cannot read graph file " + path.string());
    return read_graph(in);
}

} // namespace personagraph
