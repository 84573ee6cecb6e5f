#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisy_search {

using Index = std::size_t;

// Raised for any contract violation inside the library (bad inputs, protocol
// misuse). Carries a human-readable message only.
class SearchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A finite set of pairwise-distinct points. One-dimensional datasets are kept
// sorted ascending and use |x - y| as distance; higher dimensions use a p-norm
// (p may be +infinity).
class Dataset {
public:
    // 1-D dataset; positions must be strictly increasing.
    static Dataset line(std::vector<double> positions);

    // Evenly spaced 1-D grid x_i = i * spacing, i = 0..n-1.
    static Dataset uniform_grid(std::size_t n, double spacing = 1.0);

    // D-dimensional dataset from row-major coordinates. A 1-D input is routed
    // through line() and must therefore be sorted.
    static Dataset points(std::vector<std::vector<double>> rows, double norm_order = 2.0);

    std::size_t size() const noexcept { return n_; }
    std::size_t dimension() const noexcept { return dim_; }
    double norm_order() const noexcept { return norm_order_; }
    double min_gap() const noexcept { return min_gap_; }

    std::span<const double> point(Index i) const {
        return {coords_.data() + i * dim_, dim_};
    }

    // Only meaningful for 1-D datasets.
    double position(Index i) const { return coords_[i]; }
    const std::vector<double>& coordinates() const noexcept { return coords_; }

    double distance(Index i, Index j) const;
    double distance(std::span<const double> x, std::span<const double> y) const;

private:
    Dataset(std::vector<double> coords, std::size_t dim, double norm_order);
    void compute_min_gap();

    std::vector<double> coords_;
    std::size_t n_ = 0;
    std::size_t dim_ = 1;
    double norm_order_ = 1.0;
    double min_gap_ = std::numeric_limits<double>::infinity();
};

}  // namespace noisy_search
