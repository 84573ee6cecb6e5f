#include "noisy_search/posterior.hpp"

#include <algorithm>
#include <cmath>

namespace noisy_search {

std::string_view to_string(SimilarityFamily f) {
    return f == SimilarityFamily::Polynomial ? "polynomial" : "exponential";
}

SimilarityFamily parse_family(std::string_view name) {
    if (name == "polynomial" || name == "poly") return SimilarityFamily::Polynomial;
    if (name == "exponential" || name == "exp") return SimilarityFamily::Exponential;
    throw SearchError("unknown similarity family '" + std::string(name) + "'");
}

UserModel::UserModel(SimilarityFamily f, double t) : family(f), theta(t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw SearchError("theta must be a positive finite number");
    }
}

bool Query::contains(Index i) const {
    return std::find(indices.begin(), indices.end(), i) != indices.end();
}

void Query::validate(std::size_t n) const {
    if (indices.empty()) {
        throw SearchError("query is empty");
    }
    for (std::size_t a = 0; a < indices.size(); ++a) {
        if (indices[a] >= n) {
            throw SearchError("query index " + std::to_string(indices[a] + 1) + " out of range");
        }
        for (std::size_t b = a + 1; b < indices.size(); ++b) {
            if (indices[a] == indices[b]) {
                throw SearchError("query indices must be distinct");
            }
        }
    }
}

Posterior::Posterior(std::vector<double> mass) : mass_(std::move(mass)) {
    cumulative_.resize(mass_.size());
    double running = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        running += mass_[i];
        cumulative_[i] = running;
    }
}

Posterior Posterior::uniform(std::size_t n) {
    if (n == 0) throw SearchError("posterior over an empty dataset");
    return Posterior(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Posterior Posterior::point_mass(std::size_t n, Index at) {
    if (at >= n) throw SearchError("point mass index out of range");
    std::vector<double> m(n, 0.0);
    m[at] = 1.0;
    return Posterior(std::move(m));
}

Posterior Posterior::from_weights(std::vector<double> weights) {
    if (weights.empty()) throw SearchError("posterior over an empty dataset");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw SearchError("posterior weights must be finite and nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw SearchError("posterior weights sum to zero");
    }
    for (double& w : weights) w /= total;
    return Posterior(std::move(weights));
}

std::size_t Posterior::support_size() const {
    return static_cast<std::size_t>(
        std::count_if(mass_.begin(), mass_.end(), [](double m) { return m > 0.0; }));
}

}  // namespace noisy_search
