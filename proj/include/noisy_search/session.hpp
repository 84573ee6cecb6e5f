#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "noisy_search/feedback.hpp"
#include "noisy_search/harness.hpp"
#include "noisy_search/strategies.hpp"

namespace noisy_search {

enum class SessionStatus { Active, Found, Exhausted };
std::string_view to_string(SessionStatus s);

// HTTP-flavoured failure: BadRequest -> 400, NotFound -> 404, Conflict -> 409.
class SessionError : public std::runtime_error {
public:
    enum class Kind { BadRequest, NotFound, Conflict };
    SessionError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }
    int http_status() const noexcept;

private:
    Kind kind_;
};

struct SessionRequest {
    DatasetSpec dataset;
    StrategyKind strategy = StrategyKind::BinaryQuantile;
    std::size_t k = 2;
    UserModel model;             // theta assumed by the algorithm
    std::size_t max_queries = 0; // 0 -> default_max_queries(n)
    std::uint64_t seed = 1;      // random strategy / random datasets
};

// Parses the POST /sessions body; throws SessionError(BadRequest).
SessionRequest parse_session_request(const nlohmann::json& body);

struct RoundRecord {
    std::size_t round = 0;
    Query query;
    std::optional<std::size_t> response;  // 0-based
    bool found = false;
    double entropy_before = 0.0;
};

// One live search where a human is the responder. Not thread-safe on its own;
// callers hold lock() for every access.
class Session {
public:
    Session(std::string id, const SessionRequest& request);

    const std::string& id() const noexcept { return id_; }
    SessionStatus status() const noexcept { return status_; }
    std::size_t round() const noexcept { return round_; }
    const Query& query() const noexcept { return query_; }
    const Posterior& posterior() const noexcept { return posterior_; }
    const std::vector<RoundRecord>& history() const noexcept { return history_; }
    const Dataset& dataset() const noexcept { return *data_; }

    // Records a 0-based response for the current round and moves on. If
    // `expected_round` is given it must match the current round.
    void answer(std::size_t response, std::optional<std::size_t> expected_round = std::nullopt);
    // The human reports their target among the current query points.
    void found(std::optional<std::size_t> expected_round = std::nullopt);

    nlohmann::json summary(bool with_history) const;

    std::unique_lock<std::mutex> lock() const { return std::unique_lock(mutex_); }
    std::chrono::steady_clock::time_point last_used() const noexcept { return last_used_; }
    void touch() { last_used_ = std::chrono::steady_clock::now(); }

private:
    void check_round(std::optional<std::size_t> expected) const;
    void next_query();

    std::string id_;
    std::unique_ptr<Dataset> data_;
    std::unique_ptr<Strategy> strategy_;
    UserModel model_;
    std::size_t k_;
    std::size_t max_queries_;
    Rng rng_;
    Posterior posterior_;
    Query query_;
    std::size_t round_ = 1;
    SessionStatus status_ = SessionStatus::Active;
    std::string status_reason_;
    std::vector<RoundRecord> history_;
    mutable std::mutex mutex_;
    std::chrono::steady_clock::time_point last_used_;
};

// Concurrent in-memory session map with idle-time eviction.
class SessionStore {
public:
    explicit SessionStore(std::chrono::seconds ttl = std::chrono::hours(1));

    std::shared_ptr<Session> create(const SessionRequest& request);
    std::shared_ptr<Session> find(const std::string& id) const;
    bool erase(const std::string& id);
    // Drops sessions idle for longer than the TTL; returns how many.
    std::size_t evict_expired(std::chrono::steady_clock::time_point now =
                                  std::chrono::steady_clock::now());
    std::size_t size() const;

private:
    std::string next_id();

    std::chrono::seconds ttl_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex id_mutex_;
    std::mt19937_64 id_rng_;
    std::uint64_t counter_ = 0;
};

}  // namespace noisy_search
