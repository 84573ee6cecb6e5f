#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "noisy_search/dataset.hpp"

namespace noisy_search {

enum class SimilarityFamily { Polynomial, Exponential };

std::string_view to_string(SimilarityFamily f);
SimilarityFamily parse_family(std::string_view name);

// Comparative-feedback user: Pr(R = r) is proportional to S(T, q_r) with
// S = d^-theta (polynomial) or exp(-theta d) (exponential).
struct UserModel {
    SimilarityFamily family = SimilarityFamily::Polynomial;
    double theta = 1.0;

    UserModel() = default;
    UserModel(SimilarityFamily f, double t);
};

// k >= 2 distinct, 0-based dataset indices. Order matters: responses refer to
// positions in this list.
struct Query {
    std::vector<Index> indices;

    Query() = default;
    Query(std::initializer_list<Index> il) : indices(il) {}
    explicit Query(std::vector<Index> v) : indices(std::move(v)) {}

    std::size_t size() const noexcept { return indices.size(); }
    bool contains(Index i) const;

    // Throws unless the query has >= 1 distinct, in-range indices.
    void validate(std::size_t n) const;
};

// Probability vector over the k query positions.
struct ResponseDistribution {
    std::vector<double> probs;

    std::size_t size() const noexcept { return probs.size(); }
    double operator[](std::size_t r) const { return probs[r]; }
};

// Posterior mass over the dataset plus eagerly maintained cumulative sums.
// Always normalized (sum 1 within 1e-9) and nonnegative.
class Posterior {
public:
    static Posterior uniform(std::size_t n);
    static Posterior point_mass(std::size_t n, Index at);
    // Normalizes the given nonnegative weights; throws if all are zero.
    static Posterior from_weights(std::vector<double> weights);

    std::size_t size() const noexcept { return mass_.size(); }
    double operator[](Index i) const { return mass_[i]; }
    const std::vector<double>& mass() const noexcept { return mass_; }
    // cumulative()[i] = sum of mass over indices 0..i.
    const std::vector<double>& cumulative() const noexcept { return cumulative_; }

    std::size_t support_size() const;

private:
    explicit Posterior(std::vector<double> mass);
    std::vector<double> mass_;
    std::vector<double> cumulative_;
};

}  // namespace noisy_search
