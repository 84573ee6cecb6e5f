#pragma once

#include <random>
#include <span>
#include <vector>

#include "noisy_search/dataset.hpp"
#include "noisy_search/posterior.hpp"

namespace noisy_search {

using Rng = std::mt19937_64;

// S(x, y) as a function of the distance d(x, y). Throws for d <= 0: the
// polynomial measure diverges there and a point is never compared to itself.
double similarity(double distance, const UserModel& model);
double similarity(std::span<const double> x, std::span<const double> y, const Dataset& data,
                  const UserModel& model);

// Pr(R = r | Q, T = x_target). Throws if the target is one of the query points.
ResponseDistribution response_probs(const Dataset& data, const UserModel& model,
                                    const Query& query, Index target);

// Same as response_probs but writes into `out` (size k) to avoid allocation in
// inner loops.
void response_probs_into(const Dataset& data, const UserModel& model, const Query& query,
                         Index target, std::span<double> out);

// Draws r with probability probs[r]; returns a 0-based response position.
std::size_t sample_response(const ResponseDistribution& dist, Rng& rng);

// A_r = sum_i a_i p_{i,r}. Queried indices must carry zero posterior mass.
ResponseDistribution marginal_response_probs(const Dataset& data, const UserModel& model,
                                             const Query& query, const Posterior& posterior);

// Conditions on T not in Q (zeroes queried indices, renormalizes), then applies
// Bayes' rule a'_i = a_i p_{i,r} / A_r. `response` is 0-based.
Posterior posterior_update(const Posterior& posterior, const Dataset& data,
                           const UserModel& model, const Query& query, std::size_t response);

// Zeroes the queried indices and renormalizes.
Posterior condition_not_in_query(const Posterior& posterior, const Query& query);

// Smallest 0-based index i with c_i >= p (relative to the total mass), i.e.
// c_{i-1} < p <= c_i. Requires 0 < p <= 1.
Index quantile_index(const Posterior& posterior, double p);

// Base-2 entropy with 0 log 0 = 0.
double entropy(std::span<const double> a);
double entropy(const Posterior& posterior);

// Base-2 relative entropy D(a || b). Throws if a has mass where b has none.
double kl_divergence(std::span<const double> a, std::span<const double> b);
// Scalar form D(p || q) = D((p, 1-p) || (q, 1-q)).
double kl_divergence(double p, double q);

// Expected entropy drop sum_i a_i D(p_i || A). Query points that still carry
// mass are scored with the limiting response row: under the polynomial measure
// a target sitting on q_r picks r with certainty; under the exponential measure
// S(q_r, q_r) = 1 is used as is. When all query points have zero mass this is
// exactly E[H(a) - H(a')] for posterior_update.
double expected_info_gain(const Posterior& posterior, const Dataset& data,
                          const UserModel& model, const Query& query);

// Lower bound sum_{i in subset} a_i D(p_i || phi), phi the a-weighted mixture
// of the rows in `subset`. Same row convention as expected_info_gain.
double subset_gain_bound(const Posterior& posterior, const Dataset& data,
                         const UserModel& model, const Query& query,
                         std::span<const Index> subset);

// Response row used by the gain functions (handles positive-mass query points
// as described above).
void gain_response_row(const Dataset& data, const UserModel& model, const Query& query,
                       Index i, std::span<double> out);

}  // namespace noisy_search
