#include "noisy_search/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace noisy_search {

namespace {

constexpr std::size_t kStackQuery = 32;

// Fills `out` with normalized similarity weights given distances to each
// query point. Polynomial weights are ratioed against the smallest distance
// and exponential weights are shifted by it, so neither over- nor underflows.
void normalize_weights(std::span<const double> dist, const UserModel& model,
                       std::span<double> out) {
    const double dmin = *std::min_element(dist.begin(), dist.end());
    double total = 0.0;
    if (model.family == SimilarityFamily::Polynomial) {
        for (std::size_t r = 0; r < dist.size(); ++r) {
            out[r] = model.theta == 1.0 ? dmin / dist[r] : std::pow(dmin / dist[r], model.theta);
            total += out[r];
        }
    } else {
        for (std::size_t r = 0; r < dist.size(); ++r) {
            out[r] = std::exp(-model.theta * (dist[r] - dmin));
            total += out[r];
        }
    }
    for (double& v : out) v /= total;
}

template <typename F>
void with_scratch(std::size_t k, F&& f) {
    if (k <= kStackQuery) {
        double buf[kStackQuery];
        f(std::span<double>(buf, k));
    } else {
        std::vector<double> buf(k);
        f(std::span<double>(buf));
    }
}

}  // namespace

double similarity(double distance, const UserModel& model) {
    if (!(distance > 0.0)) {
        throw SearchError("similarity of coincident points is undefined");
    }
    if (model.family == SimilarityFamily::Polynomial) {
        return std::pow(distance, -model.theta);
    }
    return std::exp(-model.theta * distance);
}

double similarity(std::span<const double> x, std::span<const double> y, const Dataset& data,
                  const UserModel& model) {
    return similarity(data.distance(x, y), model);
}

void response_probs_into(const Dataset& data, const UserModel& model, const Query& query,
                         Index target, std::span<double> out) {
    const std::size_t k = query.size();
    with_scratch(k, [&](std::span<double> dist) {
        for (std::size_t r = 0; r < k; ++r) {
            if (query.indices[r] == target) {
                throw SearchError("target is part of the query; the search should have terminated");
            }
            dist[r] = data.distance(target, query.indices[r]);
        }
        normalize_weights(dist, model, out);
    });
}

ResponseDistribution response_probs(const Dataset& data, const UserModel& model,
                                    const Query& query, Index target) {
    query.validate(data.size());
    if (target >= data.size()) throw SearchError("target index out of range");
    ResponseDistribution d;
    d.probs.resize(query.size());
    response_probs_into(data, model, query, target, d.probs);
    return d;
}

std::size_t sample_response(const ResponseDistribution& dist, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t r = 0; r < dist.size(); ++r) {
        if (dist.probs[r] > 0.0) last_positive = r;
        acc += dist.probs[r];
        if (u < acc) return r;
    }
    return last_positive;
}

ResponseDistribution marginal_response_probs(const Dataset& data, const UserModel& model,
                                             const Query& query, const Posterior& posterior) {
    query.validate(data.size());
    for (Index q : query.indices) {
        if (posterior[q] > 0.0) {
            throw SearchError("posterior has mass on queried index " + std::to_string(q + 1));
        }
    }
    const std::size_t k = query.size();
    ResponseDistribution A;
    A.probs.assign(k, 0.0);
    with_scratch(k, [&](std::span<double> row) {
        for (Index i = 0; i < posterior.size(); ++i) {
            const double a = posterior[i];
            if (a <= 0.0) continue;
            response_probs_into(data, model, query, i, row);
            for (std::size_t r = 0; r < k; ++r) A.probs[r] += a * row[r];
        }
    });
    double total = 0.0;
    for (double v : A.probs) total += v;
    for (double& v : A.probs) v /= total;
    return A;
}

Posterior condition_not_in_query(const Posterior& posterior, const Query& query) {
    std::vector<double> w = posterior.mass();
    for (Index q : query.indices) w.at(q) = 0.0;
    double total = 0.0;
    for (double v : w) total += v;
    if (!(total > 0.0)) {
        throw SearchError("all posterior mass lies on the query; the search should have terminated");
    }
    return Posterior::from_weights(std::move(w));
}

Posterior posterior_update(const Posterior& posterior, const Dataset& data,
                           const UserModel& model, const Query& query, std::size_t response) {
    query.validate(data.size());
    if (posterior.size() != data.size()) throw SearchError("posterior/dataset size mismatch");
    if (response >= query.size()) {
        throw SearchError("response " + std::to_string(response + 1) + " outside 1.." +
                          std::to_string(query.size()));
    }
    const Posterior conditioned = condition_not_in_query(posterior, query);
    std::vector<double> w(posterior.size(), 0.0);
    with_scratch(query.size(), [&](std::span<double> row) {
        for (Index i = 0; i < w.size(); ++i) {
            const double a = conditioned[i];
            if (a <= 0.0) continue;
            response_probs_into(data, model, query, i, row);
            w[i] = a * row[response];
        }
    });
    double total = 0.0;
    for (double v : w) total += v;
    if (!(total > 0.0)) {
        throw SearchError("posterior underflowed to zero after update");
    }
    return Posterior::from_weights(std::move(w));
}

Index quantile_index(const Posterior& posterior, double p) {
    if (!(p > 0.0) || p > 1.0) {
        throw SearchError("quantile level must lie in (0, 1]");
    }
    const auto& c = posterior.cumulative();
    const double level = p == 1.0 ? c.back() : p * c.back();
    auto it = std::lower_bound(c.begin(), c.end(), level);
    if (it == c.end()) --it;
    return static_cast<Index>(it - c.begin());
}

double entropy(std::span<const double> a) {
    double h = 0.0;
    for (double v : a) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return std::max(0.0, h);
}

double entropy(const Posterior& posterior) { return entropy(posterior.mass()); }

double kl_divergence(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw SearchError("KL divergence of vectors with different sizes");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= 0.0) continue;
        if (!(b[i] > 0.0)) {
            throw SearchError("KL divergence undefined: support of a not contained in support of b");
        }
        d += a[i] * std::log2(a[i] / b[i]);
    }
    return std::max(0.0, d);
}

double kl_divergence(double p, double q) {
    const double a[2] = {p, 1.0 - p};
    const double b[2] = {q, 1.0 - q};
    return kl_divergence(a, b);
}

void gain_response_row(const Dataset& data, const UserModel& model, const Query& query, Index i,
                       std::span<double> out) {
    const std::size_t k = query.size();
    for (std::size_t r = 0; r < k; ++r) {
        if (query.indices[r] != i) continue;
        if (model.family == SimilarityFamily::Polynomial) {
            std::fill(out.begin(), out.end(), 0.0);
            out[r] = 1.0;
            return;
        }
        with_scratch(k, [&](std::span<double> dist) {
            for (std::size_t j = 0; j < k; ++j) dist[j] = data.distance(i, query.indices[j]);
            normalize_weights(dist, model, out);
        });
        return;
    }
    response_probs_into(data, model, query, i, out);
}

namespace {

template <typename Members>
double mixture_gain(const Posterior& posterior, const Dataset& data, const UserModel& model,
                    const Query& query, Members&& members) {
    const std::size_t k = query.size();
    std::vector<double> mix(k, 0.0);
    std::vector<double> row(k);
    double weight = 0.0;
    members([&](Index i) {
        const double a = posterior[i];
        if (a <= 0.0) return;
        gain_response_row(data, model, query, i, row);
        for (std::size_t r = 0; r < k; ++r) mix[r] += a * row[r];
        weight += a;
    });
    if (!(weight > 0.0)) return 0.0;
    for (double& v : mix) v /= weight;
    double gain = 0.0;
    members([&](Index i) {
        const double a = posterior[i];
        if (a <= 0.0) return;
        gain_response_row(data, model, query, i, row);
        gain += a * kl_divergence(row, mix);
    });
    return gain;
}

}  // namespace

double expected_info_gain(const Posterior& posterior, const Dataset& data,
                          const UserModel& model, const Query& query) {
    query.validate(data.size());
    return mixture_gain(posterior, data, model, query, [&](auto&& visit) {
        for (Index i = 0; i < posterior.size(); ++i) visit(i);
    });
}

double subset_gain_bound(const Posterior& posterior, const Dataset& data,
                         const UserModel& model, const Query& query,
                         std::span<const Index> subset) {
    query.validate(data.size());
    return mixture_gain(posterior, data, model, query, [&](auto&& visit) {
        for (Index i : subset) visit(i);
    });
}

}  // namespace noisy_search
