#pragma once

#include <span>
#include <vector>

namespace noisy_search {

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;     // nearest-rank
    double stderr_ = 0.0; // sample sd / sqrt(count)
};

Summary summarize(std::span<const double> values);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace noisy_search
