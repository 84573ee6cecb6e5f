#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "noisy_search/feedback.hpp"
#include "oracle.hpp"

using namespace noisy_search;

namespace {

const UserModel kPoly1(SimilarityFamily::Polynomial, 1.0);
const UserModel kExp1(SimilarityFamily::Exponential, 1.0);

std::vector<double> random_line(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> gap(0.2, 2.0);
    std::vector<double> x(n);
    double at = 0;
    for (double& v : x) v = (at += gap(rng));
    return x;
}

}  // namespace

TEST(Similarity, Families) {
    EXPECT_DOUBLE_EQ(similarity(2.0, kPoly1), 0.5);
    EXPECT_DOUBLE_EQ(similarity(2.0, UserModel(SimilarityFamily::Polynomial, 2.0)), 0.25);
    EXPECT_DOUBLE_EQ(similarity(1.0, kExp1), std::exp(-1.0));
    EXPECT_THROW(similarity(0.0, kPoly1), SearchError);
    EXPECT_THROW(UserModel(SimilarityFamily::Polynomial, 0.0), SearchError);
    EXPECT_THROW(UserModel(SimilarityFamily::Polynomial, -1.0), SearchError);
    EXPECT_EQ(parse_family("exp"), SimilarityFamily::Exponential);
    EXPECT_EQ(parse_family("polynomial"), SimilarityFamily::Polynomial);
    EXPECT_THROW(parse_family("cubic"), SearchError);
}

TEST(ResponseProbs, HandComputed) {
    // target at 0, queries at 1 and 3: weights 1 and 1/3
    const Dataset d = Dataset::line({0.0, 1.0, 3.0});
    const auto p = response_probs(d, kPoly1, Query{1, 2}, 0);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(p[0], 0.75, 1e-15);
    EXPECT_NEAR(p[1], 0.25, 1e-15);

    const auto e = response_probs(d, kExp1, Query{1, 2}, 0);
    EXPECT_NEAR(e[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
}

TEST(ResponseProbs, MatchesOracle) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_line(rng, 8);
        const Dataset d = Dataset::line(x);
        const bool ex = trial % 2;
        const double theta = trial % 3 == 0 ? 0.5 : trial % 3 == 1 ? 1.0 : 2.0;
        const UserModel m(ex ? SimilarityFamily::Exponential : SimilarityFamily::Polynomial, theta);
        const std::vector<std::size_t> q{1, 4, 6};
        for (std::size_t t : {0u, 2u, 7u}) {
            const auto got = response_probs(d, m, Query(q), t);
            const auto want = oracle::responses(x, q, t, ex, theta);
            for (std::size_t r = 0; r < q.size(); ++r) EXPECT_NEAR(got[r], want[r], 1e-12);
        }
    }
}

TEST(ResponseProbs, RejectsTargetInQuery) {
    const Dataset d = Dataset::uniform_grid(4);
    EXPECT_THROW(response_probs(d, kPoly1, Query{1, 2}, 1), SearchError);
    EXPECT_THROW(response_probs(d, kPoly1, Query{1, 1}, 0), SearchError);
    EXPECT_THROW(response_probs(d, kPoly1, Query{1, 9}, 0), SearchError);
    EXPECT_THROW(response_probs(d, kPoly1, Query{}, 0), SearchError);
}

TEST(ResponseProbs, SharperUserPrefersNearestMore) {
    const Dataset d = Dataset::line({0.0, 1.0, 2.5, 6.0});
    double prev = 0.0;
    for (double theta : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto p = response_probs(d, UserModel(SimilarityFamily::Polynomial, theta), Query{1, 2, 3}, 0);
        EXPECT_GT(p[0], prev);
        prev = p[0];
    }
    prev = 0.0;
    for (double theta : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const auto p = response_probs(d, UserModel(SimilarityFamily::Exponential, theta), Query{1, 2, 3}, 0);
        EXPECT_GT(p[0], prev);
        prev = p[0];
    }
}

TEST(ResponseProbs, StableForExtremeSharpness) {
    // theta * d ~ 1e4: naive exp() underflows every weight to zero
    const Dataset d = Dataset::line({0.0, 1.0, 2.0});
    const auto e = response_probs(d, UserModel(SimilarityFamily::Exponential, 1e4), Query{1, 2}, 0);
    EXPECT_TRUE(std::isfinite(e[0]) && std::isfinite(e[1]));
    EXPECT_NEAR(e[0], 1.0, 1e-15);
    EXPECT_GE(e[1], 0.0);
    EXPECT_NEAR(e[0] + e[1], 1.0, 1e-15);

    const Dataset far = Dataset::line({0.0, 1e4, 1e4 + 1});
    const auto f = response_probs(far, UserModel(SimilarityFamily::Exponential, 1.0), Query{1, 2}, 0);
    EXPECT_NEAR(f[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);

    const auto p = response_probs(d, UserModel(SimilarityFamily::Polynomial, 5000.0), Query{1, 2}, 0);
    EXPECT_NEAR(p[0], 1.0, 1e-15);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(SampleResponse, FrequenciesWithinThreeSigma) {
    ResponseDistribution dist{{0.5, 0.3, 0.15, 0.05}};
    Rng rng(11);
    const int trials = 100000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < trials; ++i) ++counts[sample_response(dist, rng)];
    for (std::size_t r = 0; r < 4; ++r) {
        const double p = dist[r];
        const double sigma = std::sqrt(p * (1 - p) / trials);
        EXPECT_NEAR(counts[r] / double(trials), p, 3 * sigma);
    }
}

TEST(SampleResponse, DegenerateDistribution) {
    ResponseDistribution dist{{0.0, 1.0, 0.0}};
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_response(dist, rng), 1u);
}

TEST(Marginal, MixtureOfRows) {
    const std::vector<double> x{0, 1, 2, 4, 7};
    const Dataset d = Dataset::line(x);
    const Posterior a = Posterior::from_weights({0.1, 0.0, 0.5, 0.0, 0.4});
    const auto m = marginal_response_probs(d, kPoly1, Query{1, 3}, a);
    std::vector<double> want(2, 0.0);
    for (std::size_t t : {0u, 2u, 4u}) {
        const auto p = oracle::responses(x, {1, 3}, t, false, 1.0);
        for (int r = 0; r < 2; ++r) want[r] += a[t] * p[r];
    }
    EXPECT_NEAR(m[0], want[0], 1e-15);
    EXPECT_NEAR(m[1], want[1], 1e-15);
    EXPECT_THROW(marginal_response_probs(d, kPoly1, Query{0, 1}, a), SearchError);
}

TEST(PosteriorUpdate, MatchesJointTableOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 3 + trial % 6;
        const std::size_t k = 2 + trial % 2;
        if (k >= n) continue;
        const auto x = random_line(rng, n);
        const Dataset d = Dataset::line(x);
        std::vector<double> w(n);
        for (double& v : w) v = u(rng) + 0.01;
        const Posterior prior = Posterior::from_weights(w);
        std::vector<std::size_t> q(n);
        std::iota(q.begin(), q.end(), 0);
        std::shuffle(q.begin(), q.end(), rng);
        q.resize(k);
        const bool ex = trial % 2;
        const double theta = 0.5 * (1 + trial % 4);
        const UserModel m(ex ? SimilarityFamily::Exponential : SimilarityFamily::Polynomial, theta);
        // the oracle drops queried points before applying Bayes
        std::vector<double> pw = prior.mass();
        for (std::size_t j : q) pw[j] = 0;
        double s = std::accumulate(pw.begin(), pw.end(), 0.0);
        for (double& v : pw) v /= s;
        for (std::size_t r = 0; r < k; ++r) {
            const Posterior got = posterior_update(prior, d, m, Query(q), r);
            const auto want = oracle::bayes(x, pw, q, r, ex, theta);
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
            EXPECT_NEAR(std::accumulate(got.mass().begin(), got.mass().end(), 0.0), 1.0, 1e-12);
        }
    }
}

TEST(PosteriorUpdate, ZeroesQueriedPoints) {
    const Dataset d = Dataset::uniform_grid(5);
    const Posterior a = posterior_update(Posterior::uniform(5), d, kPoly1, Query{1, 3}, 0);
    EXPECT_EQ(a[1], 0.0);
    EXPECT_EQ(a[3], 0.0);
    // likelihoods of response 1: 3/4, 1/2, 1/4
    EXPECT_NEAR(a[0], 0.5, 1e-15);
    EXPECT_NEAR(a[2], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(a[4], 1.0 / 6.0, 1e-15);
    EXPECT_THROW(posterior_update(a, d, kPoly1, Query{1, 3}, 2), SearchError);
}

TEST(PosteriorUpdate, AllMassOnQueryThrows) {
    const Dataset d = Dataset::uniform_grid(4);
    EXPECT_THROW(posterior_update(Posterior::point_mass(4, 1), d, kPoly1, Query{1, 2}, 0), SearchError);
}

TEST(Posterior, Construction) {
    const Posterior u = Posterior::uniform(4);
    EXPECT_DOUBLE_EQ(u[2], 0.25);
    EXPECT_EQ(u.support_size(), 4u);
    EXPECT_DOUBLE_EQ(u.cumulative().back(), 1.0);
    const Posterior p = Posterior::point_mass(5, 3);
    EXPECT_EQ(p.support_size(), 1u);
    EXPECT_THROW(Posterior::from_weights({1.0, -0.5}), SearchError);
    EXPECT_THROW(Posterior::from_weights({0.0, 0.0}), SearchError);
    EXPECT_THROW(Posterior::point_mass(3, 3), SearchError);
    const Posterior w = Posterior::from_weights({1, 3});
    EXPECT_DOUBLE_EQ(w[1], 0.75);
}

TEST(Quantile, SmallestIndexReachingFraction) {
    const Posterior a = Posterior::from_weights({0.1, 0.2, 0.0, 0.3, 0.4});
    EXPECT_EQ(quantile_index(a, 0.05), 0u);
    EXPECT_EQ(quantile_index(a, 0.1), 0u);
    EXPECT_EQ(quantile_index(a, 0.3), 1u);
    EXPECT_EQ(quantile_index(a, 0.31), 3u);
    EXPECT_EQ(quantile_index(a, 0.6), 3u);
    EXPECT_EQ(quantile_index(a, 1.0), 4u);
    EXPECT_THROW(quantile_index(a, 0.0), SearchError);
    EXPECT_THROW(quantile_index(a, 1.5), SearchError);
    const Posterior u = Posterior::uniform(8);
    EXPECT_EQ(quantile_index(u, 0.25), 1u);
    EXPECT_EQ(quantile_index(u, 0.5), 3u);
    EXPECT_EQ(quantile_index(u, 0.75), 5u);
}

TEST(Entropy, KnownValues) {
    EXPECT_DOUBLE_EQ(entropy(Posterior::uniform(8)), 3.0);
    EXPECT_DOUBLE_EQ(entropy(Posterior::point_mass(8, 2)), 0.0);
    const std::vector<double> p{0.5, 0.25, 0.25, 0.0};
    EXPECT_DOUBLE_EQ(entropy(p), 1.5);
}

TEST(Kl, KnownValuesAndSupport) {
    const std::vector<double> p{0.5, 0.5};
    const std::vector<double> q{0.25, 0.75};
    EXPECT_NEAR(kl_divergence(p, q), oracle::kl(p, q), 1e-15);
    EXPECT_DOUBLE_EQ(kl_divergence(p, p), 0.0);
    EXPECT_NEAR(kl_divergence(0.5, 0.25), oracle::kl2(0.5, 0.25), 1e-15);
    const std::vector<double> z{1.0, 0.0};
    EXPECT_THROW(kl_divergence(p, z), SearchError);
    EXPECT_DOUBLE_EQ(kl_divergence(z, p), 1.0);
}

TEST(InfoGain, EqualsExpectedEntropyDrop) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 6;
        const auto x = random_line(rng, n);
        const Dataset d = Dataset::line(x);
        const std::vector<std::size_t> q{static_cast<std::size_t>(trial % 3), 4};
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = (i == q[0] || i == q[1]) ? 0.0 : u(rng);
        const Posterior a = Posterior::from_weights(w);
        const bool ex = trial % 2;
        const UserModel m(ex ? SimilarityFamily::Exponential : SimilarityFamily::Polynomial, 1.5);
        EXPECT_NEAR(expected_info_gain(a, d, m, Query(q)), oracle::expected_gain(x, a.mass(), q, ex, 1.5),
                    1e-12);
    }
}

TEST(InfoGain, SubsetLowerBound) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_line(rng, 9);
        const Dataset d = Dataset::line(x);
        std::vector<double> w(9);
        for (std::size_t i = 0; i < 9; ++i) w[i] = (i == 2 || i == 6) ? 0.0 : u(rng);
        const Posterior a = Posterior::from_weights(w);
        const Query q{2, 6};
        const double full = expected_info_gain(a, d, kPoly1, q);
        std::vector<Index> subset;
        for (Index i = 0; i < 9; ++i) {
            if (i != 2 && i != 6 && u(rng) < 0.5) subset.push_back(i);
        }
        if (subset.empty()) continue;
        const double part = subset_gain_bound(a, d, kPoly1, q, subset);
        EXPECT_GE(part, -1e-15);
        EXPECT_LE(part, full + 1e-12);
    }
}

TEST(ConditionNotInQuery, RemovesAndRenormalizes) {
    const Posterior a = condition_not_in_query(Posterior::uniform(4), Query{0, 3});
    EXPECT_DOUBLE_EQ(a[0], 0.0);
    EXPECT_DOUBLE_EQ(a[1], 0.5);
    EXPECT_THROW(condition_not_in_query(Posterior::point_mass(4, 0), Query{0, 3}), SearchError);
}
