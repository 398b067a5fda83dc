#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "facruin/moments.hpp"

using namespace facruin;

namespace {

// E[exp(-s Σ g_k z_k^{-α})] over the unit-mark PPP beyond r, by nested quadrature over
// the interferer distance and its exponential mark.
double laplace_oracle(double s, double r, double alpha, double beta) {
    boost::math::quadrature::exp_sinh<double> outer, inner;
    auto ring = [&](double t) {
        const double z = r + t;
        auto mark = [&](double g) { return -std::expm1(-s * g * std::pow(z, -alpha)) * std::exp(-g); };
        return inner.integrate(mark, 1e-13) * 2.0 * std::numbers::pi * beta * z;
    };
    return std::exp(-outer.integrate(ring, 1e-12));
}

ScenarioConfig table2(double alpha, double beta = 0.1) {
    ScenarioConfig c;
    c.network.alpha = alpha;
    c.network.beta = beta;
    c.financial.c_min = 0.1;
    c.financial.c_max = 100.0;
    c.products.rate_gaps = {100.0};
    return validate(c);
}

}  // namespace

TEST(LaplaceExponent, ClosedFormMatchesQuadrature) {
    for (double alpha : {2.2, 3.0, 4.0, 5.5}) {
        for (double x : {1e-4, 0.05, 1.0, 30.0, 1e4}) {
            const double a = laplace_exponent(x, alpha);
            const double b = laplace_exponent_quadrature(x, alpha, 1e-11);
            EXPECT_NEAR(a / b, 1.0, 1e-8) << "alpha=" << alpha << " x=" << x;
        }
    }
}

TEST(InterferenceLaplace, TrivialArguments) {
    NetworkParams net;
    EXPECT_EQ(interference_laplace(0.0, 100.0, 1.0, net), 1.0);
    EXPECT_EQ(interference_laplace(0.3, 0.0, 1.0, net), 1.0);
}

TEST(InterferenceLaplace, MatchesNestedQuadrature) {
    NetworkParams net;
    net.alpha = 4.0;
    net.beta = 0.1;
    const double closed = interference_laplace(0.1, 100.0, 1.0, net);
    EXPECT_NEAR(closed / laplace_oracle(10.0, 1.0, 4.0, 0.1), 1.0, 1e-6);
    EXPECT_NEAR(closed / interference_laplace_quadrature(0.1, 100.0, 1.0, net), 1.0, 1e-6);
}

TEST(InterferenceLaplace, MonotoneAndBounded) {
    NetworkParams net;
    net.alpha = 3.0;
    double prev_u = 1.0;
    for (double u = 1e-3; u < 100.0; u *= 2.0) {
        const double v = interference_laplace(u, 50.0, 0.8, net);
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, prev_u);
        prev_u = v;
    }
    double prev_a = 1.0;
    for (double a = 1e-2; a < 1e4; a *= 3.0) {
        const double v = interference_laplace(0.2, a, 0.8, net);
        EXPECT_LE(v, prev_a);
        prev_a = v;
    }
}

TEST(SingleSlot, DerivativesAtZero) {
    FinancialParams fin;
    fin.c_min = 0.1;
    fin.c_max = 100.0;
    NetworkParams net;
    const auto e = e_derivatives_at_zero(4, 100.0, 1.0, fin, net);
    ASSERT_EQ(e.size(), 5u);
    EXPECT_EQ(e[0], 1.0);
    const auto m = single_slot_moments(4, 100.0, 1.0, fin, net);
    for (int s = 1; s <= 4; ++s) EXPECT_NEAR(e[s], (s % 2 ? -1.0 : 1.0) * m[s - 1], 1e-12 * m[s - 1]);
}

TEST(SingleSlot, DegenerateClamp) {
    FinancialParams fin;
    fin.c_min = fin.c_max = 2.5;
    NetworkParams net;
    const auto m = single_slot_moments(4, 100.0, 1.0, fin, net);
    for (int s = 1; s <= 4; ++s) EXPECT_DOUBLE_EQ(m[s - 1], std::pow(2.5, s));
}

TEST(SingleSlot, MeanMatchesSimulation) {
    FinancialParams fin;
    fin.c_min = 0.1;
    fin.c_max = 100.0;
    NetworkParams net;
    net.alpha = 4.0;
    net.beta = 0.1;
    const double r_u = 1.0, a_coef = 100.0;
    const double m1 = single_slot_moments(1, a_coef, r_u, fin, net)[0];

    // γ = H r^{-α}/I with A = A_d r^α, so c = clamp(A I / H).
    std::mt19937_64 rng(99);
    std::exponential_distribution<double> ex(1.0);
    const int n = 200000, kept = 200;
    const double scale = std::numbers::pi * net.beta;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = scale * r_u * r_u, interference = 0.0, radius = r_u;
        for (int k = 0; k < kept; ++k) {
            g += ex(rng);
            radius = std::sqrt(g / scale);
            interference += ex(rng) * std::pow(radius, -net.alpha);
        }
        interference += 2.0 * scale * std::pow(radius, 2.0 - net.alpha) / (net.alpha - 2.0);
        const double c = std::clamp(a_coef * interference / ex(rng), fin.c_min, fin.c_max);
        sum += c;
        sum_sq += c * c;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_LT(std::abs(m1 - mean), 3.0 * se) << "analytic " << m1 << " mc " << mean << " se " << se;
}

TEST(DurationSum, UnitDurationIsIdentity) {
    const std::vector<double> m{1.5, 4.0, 12.0};
    EXPECT_EQ(duration_sum_moments(m, 1), m);
}

TEST(DurationSum, SecondMomentFormula) {
    const std::vector<double> m{1.5, 4.0};
    for (int tau : {2, 3, 7}) {
        const auto s = duration_sum_moments(m, tau);
        EXPECT_NEAR(s[0], tau * 1.5, 1e-12);
        EXPECT_NEAR(s[1], tau * 4.0 + tau * (tau - 1) * 1.5 * 1.5, 1e-10);
    }
}

TEST(DurationSum, MatchesEnumeration) {
    const double v[3] = {1.0, 2.0, 5.0}, p[3] = {0.2, 0.5, 0.3};
    std::vector<double> m(4, 0.0);
    for (int s = 0; s < 4; ++s) {
        for (int k = 0; k < 3; ++k) m[s] += p[k] * std::pow(v[k], s + 1);
    }
    std::vector<double> oracle(4, 0.0);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 3; ++c) {
                const double total = v[a] + v[b] + v[c];
                for (int s = 0; s < 4; ++s) oracle[s] += p[a] * p[b] * p[c] * std::pow(total, s + 1);
            }
        }
    }
    const auto got = duration_sum_moments(m, 3);
    for (int s = 0; s < 4; ++s) EXPECT_NEAR(got[s] / oracle[s], 1.0, 1e-13);
}

TEST(RevenueMoments, TableTwoLevels) {
    EXPECT_GE(revenue_moments(table2(3.0), 1).raw[0], 75.5);
    EXPECT_LE(revenue_moments(table2(3.0), 1).raw[0], 77.0);
    EXPECT_GE(revenue_moments(table2(4.0), 1).raw[0], 59.8);
    EXPECT_LE(revenue_moments(table2(4.0), 1).raw[0], 60.9);
}

TEST(RevenueMoments, DeterministicFixture) {
    ScenarioConfig c;
    c.financial.c_min = c.financial.c_max = 3.0;
    c.durations.base.slots = 4;
    c.network.slot_duration = 0.5;
    const auto mv = revenue_moments(validate(c), 1);
    for (int s = 1; s <= mv.order(); ++s) EXPECT_NEAR(mv.raw[s - 1], std::pow(4 * 3.0 * 0.5, s), 1e-12 * std::pow(6.0, s));
}

TEST(RevenueMoments, DensityInvariance) {
    for (double alpha : {3.0, 4.0}) {
        const double ref = revenue_moments(table2(alpha, 0.1), 1).raw[0];
        for (double beta : {0.01, 1.0}) {
            EXPECT_NEAR(revenue_moments(table2(alpha, beta), 1).raw[0] / ref, 1.0, 1e-2);
        }
    }
}

TEST(RevenueMoments, DecreasingInPathloss) {
    double prev = 1e300;
    for (double alpha = 2.5; alpha <= 5.0 + 1e-9; alpha += 0.25) {
        const double ev = revenue_moments(table2(alpha), 1, 2).raw[0];
        EXPECT_LT(ev, prev) << alpha;
        prev = ev;
    }
}

TEST(RevenueMoments, MomentInequalities) {
    ScenarioConfig c;
    c.durations.base.kind = DurationKind::TruncatedGeometric;
    c.durations.base.mean_slots = 2.0;
    c.durations.base.tau_max = 6;
    const auto m = revenue_moments(validate(c), 1).raw;
    EXPECT_GE(m[1], m[0] * m[0]);
    EXPECT_GE(m[3] * m[1], m[2] * m[2]);
}

TEST(RevenueMoments, MixtureOverProducts) {
    ScenarioConfig a = table2(4.0), b = table2(4.0), mix = table2(4.0);
    a.products.rate_gaps = {10.0};
    b.products.rate_gaps = {100.0};
    mix.products.rate_gaps = {10.0, 100.0};
    mix.products.product_mix = {0.3, 0.7};
    const double ea = revenue_moments(validate(a), 1).raw[1];
    const double eb = revenue_moments(validate(b), 1).raw[1];
    EXPECT_NEAR(revenue_moments(validate(mix), 1).raw[1], 0.3 * ea + 0.7 * eb, 1e-8 * eb);
}

TEST(DistanceCutoff, TailBelowThreshold) {
    for (double beta : {0.01, 0.1, 1.0}) {
        const double z = distance_cutoff(beta);
        EXPECT_LE(1.0 - nearest_distance_cdf(z, beta), 1.01e-12);
    }
}
