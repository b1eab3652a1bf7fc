#pragma once

#include "personagraph/snapshot.hpp"
#include "personagraph/timestamp.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace personagraph {

inline constexpr int kMaxPageSize = 100;

struct GraphQLRequest {
    std::string operation;
    std::string query;
    nlohmann::json variables;

    /// Stable identity of a request: operation name plus canonical variables.
    std::string key() const;
};

struct TransportResponse {
    int status = 200;
    nlohmann::json body;
};

/// Request/response capability for the forge GraphQL endpoint.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResponse execute(const GraphQLRequest& request) = 0;
};

/// Hourly point budget shared by every collection in a run. All accounting
/// goes through one mutex.
class RateBudget {
public:
    explicit RateBudget(std::int64_t points, Timestamp window_reset_at = {});

    RateBudget(const RateBudget&) = delete;
    RateBudget& operator=(const RateBudget&) = delete;

    std::int64_t points_remaining() const;
    Timestamp window_reset_at() const;
    std::int64_t total_charged() const;

    bool can_afford(std::int64_t cost) const;

    /// Deducts min(cost, remaining) and returns the amount deducted.
    std::int64_t charge(std::int64_t cost);

    /// The only way points_remaining can grow.
    void reset_window(std::int64_t points, Timestamp next_reset_at);

private:
    mutable std::mutex mutex_;
    std::int64_t remaining_;
    std::int64_t charged_ = 0;
    Timestamp reset_at_;
};

enum class Connection { PullRequests, Issues, Discussions, Commits, CommitComments };
inline constexpr std::array<Connection, 5> kConnections = {Connection::PullRequests, Connection::Issues,
                                                           Connection::Discussions, Connection::Commits,
                                                           Connection::CommitComments};

std::string_view to_string(Connection c) noexcept;
std::optional<Connection> parse_connection(std::string_view name) noexcept;

struct ConnectionState {
    std::int64_t total = 0;
    int batch_size = kMaxPageSize;
    std::optional<std::string> cursor;
    std::int64_t fetched = 0;
    std::int64_t pages = 0;
    bool complete = false;
    std::int64_t last_cost = 1;
    nlohmann::json nodes = nlohmann::json::array(); // raw API nodes accumulated so far
};

struct CollectionPlan {
    std::string repository; // owner/name
    RepositoryMeta meta;
    std::map<std::string, ConnectionState> connections; // keyed by connection name

    std::int64_t total(Connection c) const { return connections.at(std::string(to_string(c))).total; }
    ConnectionState& state(Connection c) { return connections.at(std::string(to_string(c))); }
    const ConnectionState& state(Connection c) const { return connections.at(std::string(to_string(c))); }
};

nlohmann::json plan_to_json(const CollectionPlan& plan);
CollectionPlan plan_from_json(const nlohmann::json& j);
void save_plan(const CollectionPlan& plan, const std::filesystem::path& path);
CollectionPlan load_plan(const std::filesystem::path& path);

/// Splits "owner/name"; throws Error(Validation) otherwise.
std::pair<std::string, std::string> split_repository(std::string_view repository);

struct PlanOptions {
    int batch_size = kMaxPageSize;
    std::map<std::string, int> batch_overrides; // per connection name
};

/// Queries connection totals (one request). Cursors start absent.
CollectionPlan plan_collection(std::string_view repository, Transport& transport, RateBudget& budget,
                               const PlanOptions& options = {});

struct Suspended {
    CollectionPlan plan;
};

using CollectionOutcome = std::variant<RepoSnapshot, Suspended>;

/// Follows every connection's cursor chain until exhausted or until the
/// budget cannot cover the next page, in which case the returned plan
/// carries the fetched pages and cursors needed to resume.
CollectionOutcome collect_repository(CollectionPlan plan, Transport& transport, RateBudget& budget,
                                     Timestamp collected_at);

/// Clears the cursor and fetched pages of one connection, for use after
/// Error(CursorInvalidated).
void restart_connection(CollectionPlan& plan, Connection connection);

struct EmailResolution {
    std::map<std::string, std::optional<std::string>> logins; // normalized email -> login, nullopt if unresolved
    std::map<std::string, std::optional<Timestamp>> user_created_at;
    std::vector<std::string> errors;
    int requests = 0;
};

/// Looks up the account behind each email through a one-commit history
/// query. Emails already in `known` are skipped; each remaining email is
/// queried at most once, `batch_size` per request.
EmailResolution resolve_emails_to_users(std::string_view repository, const std::set<std::string>& emails,
                                        const std::set<std::string>& known, Transport& transport, RateBudget& budget,
                                        int batch_size = kMaxPageSize);

/// Emails bound to a login in the snapshot's commits (normalized).
std::set<std::string> bound_emails(const RepoSnapshot& snapshot);

/// Adds resolved bindings (and any newly seen users) to a snapshot.
void apply_email_resolution(RepoSnapshot& snapshot, const EmailResolution& resolution);

// ---- transports ----

/// Serves recorded exchanges from a directory of JSON files, one exchange
/// per file: {"request":{"operation","variables"},"response":{"status","body"}}.
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(const std::filesystem::path& directory);

    TransportResponse execute(const GraphQLRequest& request) override;

    const std::vector<std::string>& issued() const noexcept { return issued_; }
    void clear_log() { issued_.clear(); }
    std::size_t size() const noexcept { return exchanges_.size(); }

private:
    std::map<std::string, TransportResponse> exchanges_;
    std::vector<std::string> issued_;
};

/// Writes one exchange file in the ReplayTransport layout.
void write_exchange(const std::filesystem::path& directory, const GraphQLRequest& request,
                    const TransportResponse& response);

/// Forwards to another transport and records every exchange.
class RecordingTransport : public Transport {
public:
    RecordingTransport(Transport& inner, std::filesystem::path directory);
    TransportResponse execute(const GraphQLRequest& request) override;

private:
    Transport& inner_;
    std::filesystem::path directory_;
};

/// Live HTTPS transport to the forge GraphQL endpoint.
class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::string token, std::string host = "api.github.com", std::string path = "/graphql");
    TransportResponse execute(const GraphQLRequest& request) override;

private:
    std::string token_;
    std::string host_;
    std::string path_;
};

} // namespace personagraph
