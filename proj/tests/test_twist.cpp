#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace ruin;

TEST(WienerHopf, WorkedValues) {
    const WienerHopfRates sym = wiener_hopf_rates(0.0, 1.0, 2.0);
    EXPECT_NEAR(sym.plus, 2.0, 1e-15);
    EXPECT_NEAR(sym.minus, 2.0, 1e-15);
    const WienerHopfRates calm = wiener_hopf_rates(1.0, 1.0, 0.45 + 0.75);
    EXPECT_NEAR(calm.plus, std::sqrt(3.4) + 1.0, 1e-14);
    EXPECT_NEAR(calm.plus, 2.8440, 1e-4);
    EXPECT_NEAR(calm.minus, 0.8440, 1e-4);
    EXPECT_THROW(wiener_hopf_rates(1.0, 0.0, 1.0), ValidationError);
    EXPECT_THROW(wiener_hopf_rates(1.0, 1.0, 0.0), ValidationError);
}

TEST(WienerHopf, ProductIdentityAndStableBranches) {
    for (double r : {-50.0, -1.0, -1e-3, 0.0, 1e-3, 1.0, 50.0}) {
        for (double s2 : {1e-6, 0.5, 4.0}) {
            for (double f : {1e-3, 1.0, 60.0}) {
                const WienerHopfRates w = wiener_hopf_rates(r, s2, f);
                EXPECT_GT(w.plus, 0.0);
                EXPECT_GT(w.minus, 0.0);
                EXPECT_NEAR(w.plus * w.minus, 2.0 * f / s2, 1e-12 * 2.0 * f / s2);
                // both are roots of s2 a^2 / 2 + r a - f (plus) and s2 a^2 / 2 - r a - f (minus)
                EXPECT_NEAR(0.5 * s2 * w.plus * w.plus - r * w.plus, f, 1e-9 * std::max(1.0, f + std::abs(r * w.plus)));
                EXPECT_NEAR(0.5 * s2 * w.minus * w.minus + r * w.minus, f, 1e-9 * std::max(1.0, f + std::abs(r * w.minus)));
            }
        }
    }
}

TEST(WienerHopf, DropFactorGrowsWithVariance) {
    // (alpha_- + omega) / alpha_- at fixed r, f and omega
    double prev = 0.0;
    for (double s2 = 0.1; s2 < 100.0; s2 *= 1.5) {
        const double am = wiener_hopf_rates(1.0, s2, 1.2).minus;
        const double ratio = (am + 0.05) / am;
        EXPECT_GT(ratio, prev);
        prev = ratio;
    }
}

TEST(Twist, IdentitiesOnCorpus) {
    for (const auto& name : fixtures::corpus()) {
        const RiskModel m = fixtures::corpus_model(name);
        const TwistedModel tw = twist_model(m);
        double simplex = 0.0;
        for (double x : tw.p_q) simplex += x;
        EXPECT_NEAR(simplex, 1.0, 1e-12) << name;
        for (std::size_t i = 0; i < tw.dim(); ++i) {
            EXPECT_NEAR(tw.wh_q[i].plus, tw.wh[i].plus - tw.omega_star, 1e-8) << name;
            EXPECT_NEAR(tw.wh_q[i].minus, tw.wh[i].minus + tw.omega_star, 1e-8) << name;
            EXPECT_NEAR(tw.gamma[i], tw.gamma_alt[i], 1e-10 * tw.gamma[i]) << name;
            EXPECT_GT(tw.gamma[i], 0.0);
            EXPECT_GT(tw.q_q[i], 0.0);
            // phi^Q(a) = phi(a - omega*) - phi(-omega*)
            for (double a : {-0.2, 0.0, 0.3, 1.0}) {
                if (!m.components[i].in_domain(a - tw.omega_star)) continue;
                const double expect = m.phi(i, a - tw.omega_star) - m.phi(i, -tw.omega_star);
                EXPECT_NEAR(laplace_exponent(tw.components_q[i], a), expect, 1e-12) << name;
            }
        }
        EXPECT_GT(tw.cycle_drift_q, 0.0) << name;
        EXPECT_GE(tw.omega_big, 1.0 - 1e-12) << name;
        EXPECT_GE(tw.path_bound_constant(), tw.omega_big - 1e-12) << name;
    }
}

TEST(Twist, TablesParameters) {
    const TwistedModel fast = twist_model(fixtures::table_model(3.0));
    EXPECT_NEAR(lundberg_bound(fast, 175), 1.98e-5, 0.02 * 1.98e-5);
    const RiskModel slow = fixtures::table_model(0.75);
    const TwistedModel tw = twist_model(slow);
    const double ratio = cramer_constant(slow).A / lundberg_constant(tw);
    EXPECT_NEAR(ratio, 0.9, 0.05);
    EXPECT_NEAR(tw.p_q[0], slow.p[0] * slow.q / (slow.q - slow.phi(0, -tw.omega_star)), 1e-15);
}

TEST(Twist, IdentityTwist) {
    const RiskModel m = fixtures::table_model(0.75);
    const TwistedModel tw = twist_model(m, 0.0);
    for (std::size_t i = 0; i < tw.dim(); ++i) {
        EXPECT_DOUBLE_EQ(tw.p_q[i], m.p[i]);
        EXPECT_DOUBLE_EQ(tw.q_q[i], m.q);
        EXPECT_DOUBLE_EQ(tw.components_q[i].lambda, m.components[i].lambda);
        EXPECT_DOUBLE_EQ(tw.components_q[i].drift, m.components[i].drift);
        EXPECT_DOUBLE_EQ(tw.components_q[i].claims.rates()[0], 1.0);
        EXPECT_NEAR(tw.gamma[i], 1.0, 1e-15);
    }
    EXPECT_NEAR(tw.omega_big, 1.0, 1e-15);
}

TEST(Twist, ClaimTilt) {
    const ClaimDistribution b = ClaimDistribution::exponential(1.1);
    const ClaimDistribution bq = b.twisted(0.0486);
    EXPECT_NEAR(bq.rates()[0], 1.0514, 1e-12);
    EXPECT_NEAR(0.45 * b.laplace(-0.0486), 0.45 * 1.1 / 1.0514, 1e-12);

    const ClaimDistribution h = ClaimDistribution::hyperexponential({0.7, 0.3}, {2.0, 0.8});
    const ClaimDistribution hq = h.twisted(0.3);
    // tilted transform b^Q(a) = b(a - w) / b(-w)
    for (double a : {-0.4, 0.0, 0.5, 2.0}) EXPECT_NEAR(hq.laplace(a), h.laplace(a - 0.3) / h.laplace(-0.3), 1e-14);
}

TEST(Twist, Rejections) {
    const RiskModel m = fixtures::table_model(0.75);
    EXPECT_THROW(twist_model(m, 0.1), ValidationError);
    RiskModel no_diffusion = fixtures::single(2, 0, 1, 1);
    EXPECT_THROW(twist_model(no_diffusion), ValidationError);
    EXPECT_THROW(twist_model(fixtures::corpus_model("negative_drift.json")), ValidationError);
}

TEST(Twist, BoundFunction) {
    const TwistedModel tw = twist_model(fixtures::table_model(0.75));
    EXPECT_EQ(lundberg_bound(tw, 0.0), 1.0);
    EXPECT_NEAR(lundberg_bound(tw, 100.0), tw.omega_big * std::exp(-100.0 * tw.omega_star), 1e-18);
    EXPECT_GE(lundberg_bound(tw, 175.0), cramer_constant(fixtures::table_model(0.75)).A * std::exp(-175.0 * tw.omega_star));
}

TEST(Twist, SwitchCrossingFactor) {
    // inside the interval closed by resampling, a diffusion crossing carries alpha_-^Q / alpha_- = b gamma
    for (const auto& name : fixtures::corpus()) {
        const TwistedModel tw = twist_model(fixtures::corpus_model(name));
        for (std::size_t i = 0; i < tw.dim(); ++i)
            EXPECT_NEAR(tw.switch_crossing_factor(i), tw.b_at_twist[i] * tw.gamma[i], 1e-12) << name;
    }
}
