#pragma once

#include "personagraph/git_extract.hpp"
#include "personagraph/graph_store.hpp"
#include "personagraph/snapshot.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace personagraph {

struct IngestStats {
    std::size_t nodes_created = 0;
    std::size_t nodes_updated = 0;
    std::size_t edges_created = 0;
    std::size_t edges_deduplicated = 0;
    std::array<std::size_t, kNodeLabelCount> created_by_label{};

    std::size_t tentative_edges() const noexcept { return edges_created + edges_deduplicated; }
    std::size_t created(NodeLabel label) const noexcept { return created_by_label[static_cast<std::size_t>(label)]; }
    IngestStats& operator+=(const IngestStats& other);
};

/// One email observed with two different logins; the first binding is kept.
struct BindingConflict {
    std::string email;
    std::string kept_login;
    std::string rejected_login;
    friend bool operator==(const BindingConflict&, const BindingConflict&) = default;
};

struct EnrichResult {
    std::size_t edges_created = 0;
    std::size_t nodes_created = 0;
    std::vector<BindingConflict> conflicts;
};

/// Lowercased, trimmed address; the key of Email nodes.
std::string normalize_email(std::string_view email);

/// Natural key of the GitRepository node for "owner/name".
std::string git_repository_key(std::string_view repository);

/// Upserts every snapshot entity, then inserts the deduplicated set of
/// containment and actor relationships in one pass. Throws Error(Integrity)
/// listing logins referenced but absent from `users`.
IngestStats ingest_snapshot(const RepoSnapshot& snapshot, GraphStore& store);

IngestStats ingest_commit_stream(std::string_view repository, const std::vector<CommitRecord>& records, GraphStore& store);
IngestStats ingest_commit_stream(std::string_view repository, std::string_view stream, GraphStore& store);

IngestStats ingest_branches(std::string_view repository, const std::vector<BranchRecord>& branches, GraphStore& store);

/// IS_GIT_REPOSITORY and IS_GIT_COMMIT between forge and git nodes of the
/// same repository and sha.
EnrichResult enrich_repo_and_commits(GraphStore& store);

/// LINKED_TO_GITHUB_USER from every GitIdentity whose email is bound to a
/// login by a collected commit or by a resolved email binding.
EnrichResult enrich_identity_links(GraphStore& store);

/// Email nodes and HAS_EMAIL edges for identities, users and organizations.
EnrichResult enrich_emails(GraphStore& store);

/// All three passes in dependency order.
EnrichResult enrich_all(GraphStore& store);

} // namespace personagraph
