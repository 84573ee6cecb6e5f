#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "noisy_search/dataset.hpp"
#include "noisy_search/feedback.hpp"
#include "noisy_search/posterior.hpp"

namespace noisy_search {

enum class StrategyKind {
    BinaryQuantile,
    DBall,
    KaryIntervals,
    TopKFallback,
    RandomBaseline,
    MedianBisection,
};

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view name);

// Throws SearchError if `kind` cannot run with this dimension / k.
void check_strategy_compatible(StrategyKind kind, std::size_t dimension, std::size_t k);

// ---------------------------------------------------------------------------
// Quartile rule for k = 2 on sorted 1-D data.

struct QuartileSplit {
    // cut[0] = first point, cut[4] = last point, cut[s] = I(s/4) otherwise.
    std::array<Index, 5> cut{};
    // Interval lengths d_1..d_4 stored 0-based.
    std::array<double, 4> length{};
    std::size_t smallest = 0;  // 0-based interval with the smallest length
    std::size_t queried = 0;   // 0-based interval whose endpoints are queried
    bool degenerate = false;   // some interval has zero length
};

QuartileSplit quartile_split(const Dataset& data, const Posterior& posterior);
Query select_binary_quantile(const Dataset& data, const Posterior& posterior);

// ---------------------------------------------------------------------------
// Smallest-ball rule for k = 2 in D dimensions.

double dball_mass_threshold(std::size_t dimension);

struct BallChoice {
    Query query;
    Index center = 0;
    double radius = 0.0;        // lambda
    double ball_mass = 0.0;
    bool fallback = false;      // no point outside the 7*lambda ball
};

// Per-dataset neighbour ordering, built once (O(n^2 log n)) and shared
// read-only by every selection on that dataset.
class BallIndex {
public:
    explicit BallIndex(const Dataset& data);

    BallChoice select(const Posterior& posterior) const;
    const Dataset& data() const noexcept { return data_; }

private:
    const Dataset& data_;
    std::size_t n_;
    std::vector<std::uint32_t> order_;  // row i: neighbours of i by distance
};

Query select_dball(const Dataset& data, const Posterior& posterior);

struct SeparationReport {
    // max over x in B of ||x - q1|| / ||x - q2||; must be <= 1/3.
    double inner_ratio = 0.0;
    // min over x outside B' of ||x - q1|| / ||x - q2||; must be >= 1/2.
    double outer_ratio = 1e300;
    std::size_t inner_points = 0;
    std::size_t outer_points = 0;
    bool holds(double tol = 1e-12) const;
};

SeparationReport check_separation(const Dataset& data, const BallChoice& choice);

// ---------------------------------------------------------------------------
// Interval construction for k-ary queries on sorted 1-D data.

struct Interval {
    Index first = 0;  // index of left endpoint
    Index last = 0;   // index of right endpoint
    double mass = 0.0;
};

struct IntervalSet {
    std::vector<Interval> intervals;
    double min_mass = 0.0;  // c = 1 / (14k - 12)

    // Mass, disjointness and the pairwise gap rule.
    bool satisfies_constraints(const Dataset& data, double tol = 1e-12) const;
};

double kary_mass_threshold(std::size_t k);

// Left-to-right greedy construction; nullopt when fewer than k intervals fit.
std::optional<IntervalSet> build_intervals(const Dataset& data, const Posterior& posterior,
                                           std::size_t k);

// One endpoint per interval: the left one when the closed left half holds at
// least as much mass as the closed right half.
Query interval_endpoints(const Dataset& data, const Posterior& posterior,
                         const IntervalSet& set);

std::optional<Query> select_kary_intervals(const Dataset& data, const Posterior& posterior,
                                           std::size_t k, const UserModel& model);

// Points of the intervals strictly closer to their own interval's query point
// than to any other query point, with that query point's position.
struct AnchoredPoint {
    Index point;
    std::size_t response;
};
std::vector<AnchoredPoint> anchored_points(const Dataset& data, const IntervalSet& set,
                                           const Query& query);

// ---------------------------------------------------------------------------
// Baselines.

Query select_topk_fallback(const Posterior& posterior, std::size_t k);
Query select_random_baseline(const Dataset& data, const Posterior& posterior, std::size_t k,
                             Rng& rng);
Query select_median_bisection(const Dataset& data, const Posterior& posterior);

// ---------------------------------------------------------------------------
// Polymorphic wrapper used by the simulator and the session service. The
// dataset must outlive the strategy.

class Strategy {
public:
    virtual ~Strategy() = default;
    virtual StrategyKind kind() const noexcept = 0;
    virtual Query select(const Posterior& posterior, Rng& rng) const = 0;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const Dataset& data, std::size_t k,
                                        const UserModel& model);

}  // namespace noisy_search
