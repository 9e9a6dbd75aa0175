#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qimaps/angle_profile.hpp"
#include "qimaps/error.hpp"

using namespace qimaps;

TEST(AngleProfile, SmoothstepValues) {
    const AngleProfile p = AngleProfile::smoothstep(0.8);
    EXPECT_EQ(p(0.0), 0.8);
    EXPECT_NEAR(p(0.5), 0.4, 1e-15);
    EXPECT_EQ(p(1.0), 0.0);
    EXPECT_EQ(p(3.0), 0.0);
    EXPECT_NEAR(p.derivative(0.5), -0.8 * 1.5, 1e-14);
    EXPECT_EQ(p.derivative(1.5), 0.0);
}

TEST(AngleProfile, SupRDerivativeOfSmoothstep) {
    // r theta'(r) = 6A(r^3 - r^2) peaks at r = 2/3 with |value| = (8/9)|A|.
    for (double a : {0.1, 0.5, -1.3, 2.0}) {
        const AngleProfile p = AngleProfile::smoothstep(a);
        EXPECT_NEAR(p.sup_abs_r_derivative(), 8.0 / 9.0 * std::abs(a), 1e-14);
        EXPECT_NEAR(p.sup_abs_derivative(), 1.5 * std::abs(a), 1e-14);
    }
}

TEST(AngleProfile, SupBoundsMatchDenseScan) {
    oracle::Gen gen(21);
    for (int trial = 0; trial < 50; ++trial) {
        const int knots = gen.integer(2, 6);
        std::vector<AngleProfile::Knot> k;
        double r = 0.0;
        for (int i = 0; i < knots; ++i) {
            const bool last = i == knots - 1;
            k.push_back({r, last ? 0.0 : gen.uniform(-2.0, 2.0), last ? 0.0 : gen.uniform(-3.0, 3.0)});
            r += gen.uniform(0.05, 0.4);
        }
        const AngleProfile p(k);
        const double scanned = oracle::scan_r_theta_prime(p, 20000);
        EXPECT_GE(p.sup_abs_r_derivative(), scanned * (1.0 - 1e-6));
        EXPECT_LE(p.sup_abs_r_derivative(), scanned * (1.0 + 1e-3) + 1e-9);
    }
}

TEST(AngleProfile, ContinuousDerivativeAtKnots) {
    const AngleProfile p({{0.0, 1.0, 0.5}, {0.3, 0.2, -2.0}, {0.7, -0.4, 1.0}, {1.0, 0.0, 0.0}});
    for (double r : {0.3, 0.7}) {
        EXPECT_NEAR(p(r - 1e-12), p(r + 1e-12), 1e-10);
        EXPECT_NEAR(p.derivative(r - 1e-12), p.derivative(r + 1e-12), 1e-9);
    }
}

TEST(AngleProfile, RejectsNonvanishingEnd) {
    try {
        AngleProfile p({{0.0, 1.0, 0.0}, {1.0, 0.1, 0.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::support_violation);
    }
    EXPECT_THROW(AngleProfile({{0.1, 1.0, 0.0}, {1.0, 0.0, 0.0}}), Error);
    EXPECT_THROW(AngleProfile({{0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}}), Error);
}

TEST(AngleProfile, NegatedAndZero) {
    const AngleProfile p = AngleProfile::smoothstep(0.7);
    const AngleProfile q = p.negated();
    for (double r = 0.0; r < 1.2; r += 0.05) EXPECT_EQ(q(r), -p(r));
    EXPECT_TRUE(AngleProfile::zero().is_zero());
    EXPECT_FALSE(p.is_zero());
}
