#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noisy_search/dataset.hpp"
#include "noisy_search/posterior.hpp"

namespace noisy_search {

// Geometrically spreading 1-D points for which, under the polynomial measure,
// S(x, x_i) <= 2 S(x, x_1): every response j is picked with probability at
// most 2/j, whatever the query.
struct AdversarialInstance {
    double theta = 1.0;
    double x1 = 0.0;
    double x2 = 1.0;
    std::vector<double> points;

    std::size_t size() const noexcept { return points.size(); }
    Dataset dataset() const { return Dataset::line(points); }
};

// x_{i+1} = (x_i - x_1 2^{-1/theta}) / (1 - 2^{-1/theta}) for i >= 2.
// Throws SearchError naming the largest representable n on overflow.
AdversarialInstance gen_adversarial_points(std::size_t n, double theta, double x1 = 0.0,
                                           double x2 = 1.0);

// Largest n whose last point stays finite.
std::size_t max_adversarial_size(double theta, double x1 = 0.0, double x2 = 1.0);

// max_i |((x_{i+1}-x_i)/(x_{i+1}-x_1))^theta / (1/2) - 1| over i >= 2.
double recursion_residual(const AdversarialInstance& inst);

struct SimilarityBoundReport {
    std::size_t checks = 0;
    double max_ratio = 0.0;  // max S(x, x_i) / (2 S(x, x_1))
    std::optional<std::pair<Index, Index>> counterexample;  // (x, x_i), 0-based
    bool holds(double tol = 1e-9) const { return max_ratio <= 1.0 + tol; }
};

// Exhaustive check of S(x, x_i) <= 2 S(x, x_1) over all pairs.
SimilarityBoundReport verify_similarity_bound(const AdversarialInstance& inst);

struct ResponseBoundReport {
    bool exhaustive = false;
    std::size_t queries = 0;
    std::size_t pairs = 0;        // (query, target) combinations examined
    double max_ratio = 0.0;       // max Pr(R=j|T) * j / 2
    struct Counterexample {
        std::vector<Index> query;  // 0-based, sorted
        Index target = 0;
        std::size_t response = 0;  // 1-based j
        double probability = 0.0;
    };
    std::optional<Counterexample> counterexample;
    bool holds(double tol = 1e-12) const { return max_ratio <= 1.0 + tol; }
};

// Checks Pr(R = j | T = x) <= 2/j under the polynomial measure with the
// instance's theta. Exhaustive over sorted k-subsets and non-query targets
// when n <= 12 and k <= 4, otherwise `samples` random (query, target) pairs.
ResponseBoundReport verify_response_bound(const AdversarialInstance& inst, std::size_t k,
                                          std::uint64_t seed = 1, std::size_t samples = 100000);

struct LowerBound {
    double horizon = 0.0;           // tau = log2(n/(2k)) / (log2 log2 k + 2)
    double expected_queries = 0.0;  // tau / 2
};

// Requires k >= 3 and n > 2k.
LowerBound lower_bound_horizon(std::size_t n, std::size_t k);

// min(1, (k/n) (4 log2 k)^{t-1}); requires k >= 3, t >= 1.
double success_probability_bound(std::size_t n, std::size_t k, std::size_t t);

// {"n", "theta", "x1", "x2", "points": [...]}; doubles round-trip exactly.
std::string adversarial_to_json(const AdversarialInstance& inst);
AdversarialInstance adversarial_from_json(std::string_view text);

}  // namespace noisy_search
