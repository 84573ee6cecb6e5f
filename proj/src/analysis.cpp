#include "noisy_search/analysis.hpp"

#include <cmath>

#include "noisy_search/dataset.hpp"
#include "noisy_search/feedback.hpp"

namespace noisy_search {

QuartileConstants quartile_constants(double theta) {
    if (!(theta > 0.0)) throw SearchError("theta must be positive");
    QuartileConstants c;
    const double t = std::exp2(theta);
    c.rho = std::isinf(t) ? 1.0 : t / (1.0 + t);
    c.phi = 0.25 + 0.5 * c.rho;
    c.gain = 0.25 * (kl_divergence(c.rho, c.phi) + kl_divergence(0.5, c.phi));
    return c;
}

BoundReport theorem1_bound(std::size_t n, double theta) {
    if (n < 2) throw SearchError("theorem 1 bound needs n >= 2");
    const QuartileConstants c = quartile_constants(theta);
    BoundReport r;
    r.name = "theorem1_upper";
    r.inputs = {{"n", static_cast<double>(n)}, {"theta", theta}, {"rho", c.rho},
                {"phi", c.phi}, {"g_rho", c.gain}};
    r.value = 4.0 * std::log2(static_cast<double>(n)) / c.gain + 4.0;
    r.units = "queries";
    return r;
}

BoundReport theorem2_order(std::size_t n, std::size_t dimension) {
    if (n < 2 || dimension < 1) throw SearchError("theorem 2 order needs n >= 2, D >= 1");
    const double d = static_cast<double>(dimension);
    BoundReport r;
    r.name = "theorem2_order";
    r.inputs = {{"n", static_cast<double>(n)}, {"dimension", d}};
    r.value = std::pow(14.0 * d, d) * std::log2(static_cast<double>(n));
    r.units = "queries";
    return r;
}

double lemma9_beta(double theta, double delta0) {
    if (!(theta > 0.0) || !(delta0 > 0.0)) {
        throw SearchError("beta needs theta > 0 and delta0 > 0");
    }
    const double td = theta * delta0;
    return 1.0 / (1.0 + 2.0 * std::exp(-td) * (1.0 + 1.0 / td));
}

double lemma10_gain(double beta, std::size_t k) {
    if (!(beta > 0.0 && beta < 1.0)) throw SearchError("beta must lie in (0, 1)");
    if (k < 2) throw SearchError("k must be >= 2");
    const double kk = static_cast<double>(k);
    const double inner =
        beta * std::log2(beta * kk) + (1.0 - beta) * std::log2((1.0 - beta) * kk / (kk - 1.0));
    return inner / 28.0;
}

BoundReport theorem4_trend(std::size_t n, std::size_t k, double theta, double delta0) {
    if (n < 2 || k < 2) throw SearchError("theorem 4 trend needs n >= 2, k >= 2");
    const double beta = lemma9_beta(theta, delta0);
    BoundReport r;
    r.name = "theorem4_trend";
    r.inputs = {{"n", static_cast<double>(n)}, {"k", static_cast<double>(k)},
                {"theta", theta}, {"delta0", delta0}, {"beta", beta},
                {"lemma10_gain", lemma10_gain(beta, k)}};
    r.value = std::log2(static_cast<double>(n)) / std::log2(static_cast<double>(k));
    r.units = "queries";
    return r;
}

}  // namespace noisy_search
