#include "noisy_search/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace noisy_search {

Dataset::Dataset(std::vector<double> coords, std::size_t dim, double norm_order)
    : coords_(std::move(coords)), dim_(dim), norm_order_(norm_order) {
    n_ = dim_ == 0 ? 0 : coords_.size() / dim_;
}

Dataset Dataset::line(std::vector<double> positions) {
    if (positions.empty()) {
        throw SearchError("dataset must contain at least one point");
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!std::isfinite(positions[i])) {
            throw SearchError("dataset positions must be finite");
        }
        if (i > 0 && !(positions[i - 1] < positions[i])) {
            throw SearchError("1-D positions must be strictly increasing (violated at index " +
                              std::to_string(i + 1) + ")");
        }
    }
    Dataset d(std::move(positions), 1, 1.0);
    d.compute_min_gap();
    return d;
}

Dataset Dataset::uniform_grid(std::size_t n, double spacing) {
    if (!(spacing > 0.0)) {
        throw SearchError("grid spacing must be positive");
    }
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = static_cast<double>(i) * spacing;
    }
    return line(std::move(xs));
}

Dataset Dataset::points(std::vector<std::vector<double>> rows, double norm_order) {
    if (rows.empty()) {
        throw SearchError("dataset must contain at least one point");
    }
    const std::size_t dim = rows.front().size();
    if (dim == 0) {
        throw SearchError("points must have at least one coordinate");
    }
    if (dim == 1) {
        std::vector<double> xs;
        xs.reserve(rows.size());
        for (const auto& r : rows) {
            if (r.size() != 1) throw SearchError("inconsistent point dimensions");
            xs.push_back(r[0]);
        }
        return line(std::move(xs));
    }
    if (!(norm_order >= 1.0)) {
        throw SearchError("norm order must be >= 1");
    }
    std::vector<double> coords;
    coords.reserve(rows.size() * dim);
    for (const auto& r : rows) {
        if (r.size() != dim) throw SearchError("inconsistent point dimensions");
        for (double v : r) {
            if (!std::isfinite(v)) throw SearchError("point coordinates must be finite");
            coords.push_back(v);
        }
    }
    Dataset d(std::move(coords), dim, norm_order);
    d.compute_min_gap();
    return d;
}

double Dataset::distance(std::span<const double> x, std::span<const double> y) const {
    if (dim_ == 1) {
        return std::abs(x[0] - y[0]);
    }
    if (std::isinf(norm_order_)) {
        double m = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) m = std::max(m, std::abs(x[d] - y[d]));
        return m;
    }
    if (norm_order_ == 2.0) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            const double t = x[d] - y[d];
            s += t * t;
        }
        return std::sqrt(s);
    }
    if (norm_order_ == 1.0) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) s += std::abs(x[d] - y[d]);
        return s;
    }
    double s = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) s += std::pow(std::abs(x[d] - y[d]), norm_order_);
    return std::pow(s, 1.0 / norm_order_);
}

double Dataset::distance(Index i, Index j) const {
    if (dim_ == 1) {
        return std::abs(coords_[i] - coords_[j]);
    }
    return distance(point(i), point(j));
}

void Dataset::compute_min_gap() {
    min_gap_ = std::numeric_limits<double>::infinity();
    if (dim_ == 1) {
        for (std::size_t i = 1; i < n_; ++i) {
            min_gap_ = std::min(min_gap_, coords_[i] - coords_[i - 1]);
        }
        return;
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double d = distance(i, j);
            if (!(d > 0.0)) {
                throw SearchError("dataset points " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1) + " coincide");
            }
            min_gap_ = std::min(min_gap_, d);
        }
    }
}

}  // namespace noisy_search
