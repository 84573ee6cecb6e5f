#include "noisy_search/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "noisy_search/feedback.hpp"

namespace noisy_search {

namespace {

void check_seed(double theta, double x1, double x2) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw SearchError("theta must be positive");
    if (!std::isfinite(x1) || !std::isfinite(x2) || !(x1 < x2)) {
        throw SearchError("adversarial seeds need finite x1 < x2");
    }
}

// Calls f(points) until f returns false or `limit` points exist; returns
// the number of finite, increasing points produced.
template <typename F>
std::size_t generate(double theta, double x1, double x2, std::size_t limit, F&& emit) {
    const double shrink = std::exp2(-1.0 / theta);
    const double denom = 1.0 - shrink;
    if (!(denom > 0.0)) throw SearchError("theta too large: recursion degenerates");
    std::size_t count = 0;
    double prev = x1;
    for (double x : {x1, x2}) {
        if (count == limit) return count;
        emit(x);
        ++count;
        prev = x;
    }
    while (count < limit) {
        const double next = (prev - x1 * shrink) / denom;
        if (!std::isfinite(next) || !(next > prev)) break;
        emit(next);
        ++count;
        prev = next;
    }
    return count;
}

}  // namespace

std::size_t max_adversarial_size(double theta, double x1, double x2) {
    check_seed(theta, x1, x2);
    return generate(theta, x1, x2, std::numeric_limits<std::size_t>::max() / 2, [](double) {});
}

AdversarialInstance gen_adversarial_points(std::size_t n, double theta, double x1, double x2) {
    check_seed(theta, x1, x2);
    if (n < 2) throw SearchError("adversarial instance needs n >= 2");
    AdversarialInstance inst;
    inst.theta = theta;
    inst.x1 = x1;
    inst.x2 = x2;
    inst.points.reserve(n);
    const std::size_t made =
        generate(theta, x1, x2, n, [&](double x) { inst.points.push_back(x); });
    if (made < n) {
        throw SearchError("adversarial instance overflows: at most n = " + std::to_string(made) +
                          " points are representable for theta = " + std::to_string(theta));
    }
    return inst;
}

double recursion_residual(const AdversarialInstance& inst) {
    const auto& x = inst.points;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const double ratio = std::pow((x[i + 1] - x[i]) / (x[i + 1] - x[0]), inst.theta);
        worst = std::max(worst, std::abs(ratio / 0.5 - 1.0));
    }
    return worst;
}

SimilarityBoundReport verify_similarity_bound(const AdversarialInstance& inst) {
    const auto& x = inst.points;
    SimilarityBoundReport rep;
    for (Index i = 1; i < x.size(); ++i) {
        for (Index v = 1; v < x.size(); ++v) {
            if (v == i) continue;
            // S(x_v, x_i) / (2 S(x_v, x_1)) = (|x_v - x_1| / |x_v - x_i|)^theta / 2
            const double r =
                0.5 * std::pow(std::abs(x[v] - x[0]) / std::abs(x[v] - x[i]), inst.theta);
            ++rep.checks;
            if (r > rep.max_ratio) {
                rep.max_ratio = r;
                if (!rep.holds()) rep.counterexample = std::make_pair(v, i);
            }
        }
    }
    return rep;
}

ResponseBoundReport verify_response_bound(const AdversarialInstance& inst, std::size_t k,
                                          std::uint64_t seed, std::size_t samples) {
    const std::size_t n = inst.size();
    if (k < 2 || k >= n) throw SearchError("response bound check needs 2 <= k < n");
    const Dataset data = inst.dataset();
    const UserModel model(SimilarityFamily::Polynomial, inst.theta);
    ResponseBoundReport rep;
    std::vector<double> probs(k);

    auto examine = [&](const Query& q, Index target) {
        response_probs_into(data, model, q, target, probs);
        ++rep.pairs;
        for (std::size_t j = 0; j < k; ++j) {
            const double r = probs[j] * static_cast<double>(j + 1) / 2.0;
            if (r > rep.max_ratio) {
                rep.max_ratio = r;
                if (!rep.holds()) {
                    rep.counterexample = ResponseBoundReport::Counterexample{
                        q.indices, target, j + 1, probs[j]};
                }
            }
        }
    };

    if (n <= 12 && k <= 4) {
        rep.exhaustive = true;
        std::vector<Index> comb(k);
        std::iota(comb.begin(), comb.end(), Index{0});
        while (true) {
            const Query q{comb};
            ++rep.queries;
            for (Index t = 0; t < n; ++t) {
                if (!q.contains(t)) examine(q, t);
            }
            // Next lexicographic k-subset.
            std::size_t pos = k;
            while (pos > 0 && comb[pos - 1] == n - k + (pos - 1)) --pos;
            if (pos == 0) break;
            ++comb[pos - 1];
            for (std::size_t m = pos; m < k; ++m) comb[m] = comb[m - 1] + 1;
        }
        return rep;
    }

    Rng rng(seed);
    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t j = 0; j <= k; ++j) {
            std::uniform_int_distribution<std::size_t> pick(j, n - 1);
            std::swap(all[j], all[pick(rng)]);
        }
        std::vector<Index> qi(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(qi.begin(), qi.end());
        ++rep.queries;
        examine(Query{std::move(qi)}, all[k]);
    }
    return rep;
}

LowerBound lower_bound_horizon(std::size_t n, std::size_t k) {
    if (k < 3) throw SearchError("lower bound requires k >= 3");
    if (n <= 2 * k) throw SearchError("lower bound requires n > 2k");
    const double kk = static_cast<double>(k);
    LowerBound lb;
    lb.horizon = std::log2(static_cast<double>(n) / (2.0 * kk)) / (std::log2(std::log2(kk)) + 2.0);
    lb.expected_queries = 0.5 * lb.horizon;
    return lb;
}

double success_probability_bound(std::size_t n, std::size_t k, std::size_t t) {
    if (k < 3) throw SearchError("success probability bound requires k >= 3");
    if (t < 1) throw SearchError("round index starts at 1");
    if (n == 0) throw SearchError("n must be positive");
    const double kk = static_cast<double>(k);
    const double v = kk / static_cast<double>(n) *
                     std::pow(4.0 * std::log2(kk), static_cast<double>(t - 1));
    return std::min(1.0, v);
}

std::string adversarial_to_json(const AdversarialInstance& inst) {
    nlohmann::json j;
    j["n"] = inst.size();
    j["theta"] = inst.theta;
    j["x1"] = inst.x1;
    j["x2"] = inst.x2;
    j["points"] = inst.points;
    return j.dump(2) + "\n";
}

AdversarialInstance adversarial_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SearchError(std::string("malformed adversarial instance: ") + e.what());
    }
    try {
        AdversarialInstance inst;
        inst.theta = j.at("theta").get<double>();
        inst.x1 = j.at("x1").get<double>();
        inst.x2 = j.at("x2").get<double>();
        inst.points = j.at("points").get<std::vector<double>>();
        const auto n = j.at("n").get<std::size_t>();
        if (n != inst.points.size()) {
            throw SearchError("header n = " + std::to_string(n) + " but " +
                              std::to_string(inst.points.size()) + " points given");
        }
        check_seed(inst.theta, inst.x1, inst.x2);
        if (n < 2 || inst.points[0] != inst.x1 || inst.points[1] != inst.x2) {
            throw SearchError("points do not start with the declared seeds");
        }
        Dataset::line(inst.points);
        if (recursion_residual(inst) > 1e-9) {
            throw SearchError("points do not follow the adversarial recursion");
        }
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw SearchError(std::string("invalid adversarial instance: ") + e.what());
    }
}

}  // namespace noisy_search
