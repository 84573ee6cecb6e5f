#pragma once

#include <map>
#include <string>

#include "noisy_search/dataset.hpp"

namespace noisy_search {

// A named closed-form quantity with the inputs it was evaluated at.
struct BoundReport {
    std::string name;
    std::map<std::string, double> inputs;
    double value = 0.0;
    std::string units;  // "queries" | "bits" | "probability"
};

// Constants of the quartile strategy's guarantee for the polynomial measure.
struct QuartileConstants {
    double rho = 0.0;     // 2^theta / (1 + 2^theta)
    double phi = 0.0;     // 1/4 + rho/2
    double gain = 0.0;    // G = (D(rho || phi) + D(1/2 || phi)) / 4, bits per query
};

QuartileConstants quartile_constants(double theta);

// 4 log2(n) / G + 4 expected queries.
BoundReport theorem1_bound(std::size_t n, double theta);

// O((14D)^D log2 n) growth term for the smallest-ball strategy. Reported only.
BoundReport theorem2_order(std::size_t n, std::size_t dimension);

// beta = 1 / (1 + 2 e^{-theta d0} (1 + 1/(theta d0))); natural exponent.
double lemma9_beta(double theta, double delta0);

// (1/28) [beta log2(beta k) + (1 - beta) log2((1 - beta) k / (k - 1))].
double lemma10_gain(double beta, std::size_t k);

// log2 n / log2 k scaling term for k-ary interval queries.
BoundReport theorem4_trend(std::size_t n, std::size_t k, double theta, double delta0);

}  // namespace noisy_search
