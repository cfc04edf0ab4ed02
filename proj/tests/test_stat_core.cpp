#include "metaaudit/errors.hpp"
#include "metaaudit/stat_core.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace metaaudit;

TEST(NormalCdf, KnownValues) {
    EXPECT_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.959964), 0.975, 1e-6);
    // asymptotic tail: phi(8)/8 * (1 - 1/64 + 3/4096) = 6.2210e-16
    EXPECT_NEAR(normal_cdf(-8.0) / 6.220960574271784e-16, 1.0, 1e-9);
}

TEST(NormalCdf, MatchesSeriesOracle) {
    for (double x = -9.0; x <= 9.0; x += 0.0625) {
        EXPECT_NEAR(normal_cdf(x), static_cast<double>(oracle::phi(x)), 1e-12) << "x=" << x;
    }
}

TEST(NormalCdf, SymmetricAndMonotone) {
    double prev = 0.0;
    for (double x = -10.0; x <= 10.0; x += 0.01) {
        EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-14);
        EXPECT_GE(normal_cdf(x), prev);
        prev = normal_cdf(x);
    }
}

TEST(NormalCdf, RejectsNonFinite) {
    EXPECT_THROW(normal_cdf(NAN), ValidationError);
    EXPECT_THROW(normal_cdf(INFINITY), ValidationError);
}

TEST(NormalQuantile, KnownValues) {
    EXPECT_EQ(normal_quantile(0.5), 0.0);
    EXPECT_NEAR(normal_quantile(0.975), 1.959964, 1e-6);
    EXPECT_NEAR(normal_quantile(0.95), 1.644854, 1e-6);
    EXPECT_NEAR(z_critical(0.95), 1.959963984540054, 1e-13);
}

TEST(NormalQuantile, RoundTripsThroughCdf) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        const double q = u(rng);
        if (q <= 0.0) continue;
        EXPECT_NEAR(normal_cdf(normal_quantile(q)), q, 1e-10);
    }
    for (double q : {1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.02425, 0.075, 0.925, 1.0 - 1e-10}) {
        const double x = normal_quantile(q);
        EXPECT_NEAR(normal_cdf(x), q, 1e-10 * std::max(1.0, q));
        if (q < 0.5) {
            EXPECT_NEAR(normal_cdf(x) / q, 1.0, 1e-12) << q;
        }
    }
}

TEST(NormalQuantile, RejectsOutOfRange) {
    EXPECT_THROW(normal_quantile(0.0), ValidationError);
    EXPECT_THROW(normal_quantile(1.0), ValidationError);
    EXPECT_THROW(normal_quantile(-0.2), ValidationError);
}

TEST(PFromEstimate, NullEffectGivesPOne) {
    const auto r = p_from_estimate(make_effect("null", 1.0, 0.9, 1.0 / 0.9));
    EXPECT_EQ(r.z, 0.0);
    EXPECT_EQ(r.p, 1.0);
}

TEST(PFromEstimate, OzoneAndPm10AgainstOracle) {
    struct Case {
        double rr, lo, hi, approx;
    };
    for (const auto& c : {Case{1.003, 0.997, 1.010, 0.365}, Case{1.006, 1.002, 1.009, 7.6e-4}}) {
        const auto r = p_from_estimate(make_effect("", c.rr, c.lo, c.hi));
        const long double se = (std::log((long double)c.hi) - std::log((long double)c.lo)) /
                               (2.0L * 1.959963984540054235524L);
        const long double z = std::log((long double)c.rr) / se;
        EXPECT_NEAR(r.z, (double)z, 1e-10);
        EXPECT_NEAR(r.p, (double)oracle::two_sided_p(z), 1e-12);
        EXPECT_NEAR(r.p / c.approx, 1.0, 0.01);
    }
}

TEST(PFromEstimate, Errors) {
    EXPECT_THROW(p_from_estimate({"x", -1.0, 0.5, 2.0, 0.95}), ValidationError);
    EXPECT_THROW(p_from_estimate({"x", 1.0, 0.0, 2.0, 0.95}), ValidationError);
    EXPECT_THROW(p_from_estimate({"x", 1.0, 1.0, 1.0, 0.95}), DegenerateIntervalError);
    EXPECT_THROW(p_from_estimate({"x", 3.0, 1.0, 2.0, 0.95}), ValidationError);
    EXPECT_THROW(p_from_estimate({"x", 1.0, 0.5, 2.0, 1.0}), ValidationError);
}

TEST(PFromEstimate, RoundTripProperty) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> zdist(-6.0, 6.0), sedist(0.001, 1.0), lvl(0.5, 0.999);
    for (int i = 0; i < 2000; ++i) {
        const double z = zdist(rng), se = sedist(rng), level = lvl(rng);
        const double zc = z_critical(level);
        const EffectEstimate e{"rt", std::exp(z * se), std::exp(z * se - zc * se),
                               std::exp(z * se + zc * se), level};
        const auto r = p_from_estimate(e);
        EXPECT_NEAR(r.z, z, 1e-9);
        EXPECT_NEAR(r.p, two_sided_p(z), 1e-9);
    }
}

TEST(PFromEstimate, PDecreasesWithEffectAtFixedWidth) {
    double prev = 2.0;
    for (double d = 0.0; d < 0.2; d += 0.005) {
        const double half = 0.05;
        const auto r = p_from_estimate(
            make_effect("", std::exp(d), std::exp(d - half), std::exp(d + half)));
        EXPECT_LT(r.p, prev);
        prev = r.p;
    }
}

TEST(TwoSidedP, ClampedAwayFromZero) {
    EXPECT_EQ(two_sided_p(60.0), kMinPValue);
    EXPECT_NEAR(neg_log10(two_sided_p(60.0)), 300.0, 1e-9);
    EXPECT_EQ(neg_log10(1.0), 0.0);
    EXPECT_FALSE(std::signbit(neg_log10(1.0)));
}

TEST(QuantileType6, SingleElementAndBounds) {
    const std::vector<double> one{7.0};
    for (double q : {0.01, 0.5, 0.99}) EXPECT_EQ(quantile_type6(one, q), 7.0);
    const std::vector<double> v{5, 1, 9, 3};
    EXPECT_EQ(quantile_type6(v, 0.1), 1.0);
    EXPECT_EQ(quantile_type6(v, 0.95), 9.0);
    // h = 5 * 0.5 = 2.5 -> halfway between 3 and 5
    EXPECT_EQ(quantile_type6(v, 0.5), 4.0);
    EXPECT_THROW(quantile_type6(std::vector<double>{}, 0.5), ValidationError);
}

TEST(QuantileType6, MonotoneInQ) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> v(1 + t % 17);
        for (auto& x : v) x = u(rng);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        double prev = -INFINITY;
        for (double q = 0.01; q < 1.0; q += 0.01) {
            const double x = quantile_type6(v, q);
            EXPECT_GE(x, prev);
            EXPECT_GE(x, *lo);
            EXPECT_LE(x, *hi);
            prev = x;
        }
    }
}

TEST(Fwer, Values) {
    EXPECT_GT(fwer(500, 0.05), 0.999);
    EXPECT_NEAR(fwer(500, 0.005), 0.918, 0.001);
    EXPECT_NEAR(fwer(1, 0.05), 0.05, 1e-15);
    EXPECT_THROW(fwer(0, 0.05), ValidationError);
}

TEST(Fwer, MonotoneInNAndAlpha) {
    for (std::int64_t n = 1; n < 200; ++n) EXPECT_GT(fwer(n + 1, 0.01), fwer(n, 0.01));
    for (double a = 0.001; a < 0.5; a += 0.001) EXPECT_GT(fwer(10, a + 0.001), fwer(10, a));
    EXPECT_LT(fwer(10, 1e-12), 1e-10);
}

TEST(Bonferroni, Values) {
    EXPECT_NEAR(bonferroni_line(0.05, 66).neg_log10, 3.12, 0.005);
    const auto one = bonferroni_line(0.05, 1);
    EXPECT_EQ(one.threshold, 0.05);
    EXPECT_NEAR(one.neg_log10, 1.30103, 1e-5);
    EXPECT_NEAR(bonferroni_line(0.05, 204).threshold, 2.4509803921568627e-4, 1e-15);
    EXPECT_THROW(bonferroni_line(0.05, 0), ValidationError);
}
