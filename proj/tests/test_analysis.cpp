#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "noisy_search/analysis.hpp"
#include "oracle.hpp"

using namespace noisy_search;

TEST(Quartile, ConstantsAtThetaOne) {
    const auto c = quartile_constants(1.0);
    EXPECT_NEAR(c.rho, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(c.phi, 7.0 / 12.0, 1e-15);
    EXPECT_NEAR(oracle::kl2(2.0 / 3.0, 7.0 / 12.0), 0.0211207, 1e-7);
    EXPECT_NEAR(oracle::kl2(0.5, 7.0 / 12.0), 0.0203210, 1e-7);
    EXPECT_NEAR(c.gain, 0.01036041981, 1e-11);
}

TEST(Quartile, GainMatchesDivergenceOracle) {
    for (double theta : {0.1, 0.5, 1.0, 2.0, 3.0, 8.0}) {
        const auto c = quartile_constants(theta);
        const double rho = std::pow(2.0, theta) / (1 + std::pow(2.0, theta));
        const double phi = 0.25 + rho / 2;
        EXPECT_NEAR(c.rho, rho, 1e-15);
        EXPECT_NEAR(c.gain, (oracle::kl2(rho, phi) + oracle::kl2(0.5, phi)) / 4, 1e-14);
        EXPECT_GT(c.rho, c.phi);
        EXPECT_GT(c.phi, 0.5);
        EXPECT_GT(c.gain, 0.0);
    }
    EXPECT_THROW(quartile_constants(0.0), SearchError);
}

TEST(Bounds, UpperBoundValues) {
    const auto b = theorem1_bound(1024, 1.0);
    EXPECT_EQ(b.name, "theorem1_upper");
    EXPECT_NEAR(b.value, 40.0 / 0.01036041981 + 4.0, 1e-6);
    EXPECT_NEAR(b.value, 3864.84741, 1e-4);
    EXPECT_EQ(b.units, "queries");
    EXPECT_DOUBLE_EQ(b.inputs.at("n"), 1024.0);
    // sharper users need fewer queries
    EXPECT_LT(theorem1_bound(1024, 2.0).value, b.value);
    EXPECT_THROW(theorem1_bound(1, 1.0), SearchError);
}

TEST(Bounds, DimensionOrder) {
    EXPECT_NEAR(theorem2_order(1024, 1).value, 140.0, 1e-9);
    EXPECT_NEAR(theorem2_order(1024, 2).value, 784.0 * 10.0, 1e-9);
}

TEST(Bounds, Beta) {
    EXPECT_NEAR(lemma9_beta(1.0, 1.0), std::exp(1.0) / (std::exp(1.0) + 4.0), 1e-15);
    EXPECT_NEAR(lemma9_beta(1.0, 1.0), 0.4046096752, 1e-10);
    EXPECT_GT(lemma9_beta(3.0, 1.0), lemma9_beta(1.0, 1.0));
    EXPECT_THROW(lemma9_beta(1.0, 0.0), SearchError);
}

TEST(Bounds, KaryGainMatchesDivergenceFromUniform) {
    for (std::size_t k : {2u, 3u, 4u, 8u, 16u, 64u}) {
        for (double beta : {0.1, 0.4046096752, 0.5, 0.9}) {
            std::vector<double> p(k, (1 - beta) / double(k - 1));
            p[0] = beta;
            const std::vector<double> u(k, 1.0 / double(k));
            EXPECT_NEAR(lemma10_gain(beta, k), oracle::kl(p, u) / 28.0, 1e-14) << k << " " << beta;
        }
    }
    EXPECT_NEAR(lemma10_gain(0.4046096752, 16), 0.0250, 1e-4);
    EXPECT_NEAR(lemma10_gain(0.5, 2), 0.0, 1e-15);
    EXPECT_THROW(lemma10_gain(1.0, 4), SearchError);
    EXPECT_THROW(lemma10_gain(0.5, 1), SearchError);
}

TEST(Bounds, KaryTrend) {
    const auto t = theorem4_trend(4096, 8, 1.0, 1.0);
    EXPECT_NEAR(t.value, 4.0, 1e-12);
    EXPECT_NEAR(t.inputs.at("beta"), 0.4046096752, 1e-10);
    EXPECT_NEAR(t.inputs.at("lemma10_gain"), lemma10_gain(t.inputs.at("beta"), 8), 1e-15);
}
