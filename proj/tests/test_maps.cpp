#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "qimaps/maps.hpp"

using namespace qimaps;

namespace {

Errc code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return Errc::invalid_argument;
}

DiskMap twist(double amplitude, int n = 2) { return make_twist_disk_map(AngleProfile::smoothstep(amplitude), 0, 1, n); }

}  // namespace

// --- sphere maps ----------------------------------------------------------------------

TEST(SphereMap, OrthogonalAndIdentity) {
    const MatrixN r = rotation_matrix(0, 1, std::numbers::pi / 2.0, 2);
    const SphereMap s = SphereMap::orthogonal(r);
    const VectorN y = s.eval(VectorN{1.0, 0.0});
    EXPECT_NEAR(y[0], 0.0, 1e-15);
    EXPECT_NEAR(y[1], 1.0, 1e-15);
    EXPECT_EQ(s.lambda_theoretical().value(), 1.0);
    EXPECT_EQ(code_of([] { (void)SphereMap::orthogonal(MatrixN::identity(2) * 2.0); }), Errc::invalid_matrix);
    EXPECT_EQ(code_of([&] { (void)s.eval(VectorN{1.1, 0.0}); }), Errc::off_sphere);
}

TEST(SphereMap, LatitudeMatchesAngleFormula) {
    oracle::Gen gen(41);
    for (double beta : {-0.9, -0.3, 0.0, 0.5, 0.9}) {
        const VectorN axis{0.0, 0.0, 1.0};
        const SphereMap s = make_latitude_sphere_map(beta, axis);
        for (int i = 0; i < 200; ++i) {
            const VectorN x = gen.unit(3);
            const VectorN y = s.eval(x);
            EXPECT_NEAR(norm(y), 1.0, 1e-9);
            const double a = std::acos(std::clamp(x[2], -1.0, 1.0));
            const double b = std::acos(std::clamp(y[2], -1.0, 1.0));
            EXPECT_NEAR(b, a + beta * std::sin(a), 1e-7);
            // Longitude unchanged.
            EXPECT_NEAR(std::atan2(y[1], y[0]), std::atan2(x[1], x[0]), 1e-9);
            const VectorN back = s.eval_inverse(y);
            EXPECT_LT(distance(back, x), 1e-12);
            const double a_inv = oracle::latitude_inverse_angle(beta, a);
            const double got = std::acos(std::clamp(s.eval_inverse(x)[2], -1.0, 1.0));
            EXPECT_NEAR(got, a_inv, 1e-7);
        }
        EXPECT_LT(distance(s.eval(axis), axis), 1e-15);
        EXPECT_LT(distance(s.eval(-axis), -axis), 1e-15);
    }
    EXPECT_EQ(code_of([] { (void)make_latitude_sphere_map(0.95, VectorN{1.0, 0.0}); }), Errc::monotonicity);
}

TEST(SphereMap, LatitudeChordalClaimHoldsOnDenseCircle) {
    for (double beta : {0.25, 0.5, 0.75}) {
        const SphereMap s = make_latitude_sphere_map(beta, VectorN{1.0, 0.0});
        const int m = 1500;
        double worst = 1.0;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; j += 7) {
                const double a = 2.0 * std::numbers::pi * i / m;
                const double b = 2.0 * std::numbers::pi * j / m;
                const VectorN x{std::cos(a), std::sin(a)};
                const VectorN y{std::cos(b), std::sin(b)};
                const double r = distance(s.eval(x), s.eval(y)) / distance(x, y);
                worst = std::max({worst, r, 1.0 / r});
            }
        }
        EXPECT_LE(worst, latitude_geodesic_claim(beta) * std::numbers::pi / 2.0);
        EXPECT_LE(worst, s.lambda_theoretical().value());
    }
}

TEST(SphereMap, ComposedAndInverse) {
    oracle::Gen gen(42);
    const SphereMap a = make_latitude_sphere_map(0.4, VectorN{0.0, 1.0, 0.0});
    const SphereMap b = SphereMap::conjugated(gen.rotation(3), make_latitude_sphere_map(-0.6, VectorN{1.0, 0.0, 0.0}));
    const SphereMap c = SphereMap::composed({a, b}, 3);
    const SphereMap ci = c.inverse();
    for (int i = 0; i < 300; ++i) {
        const VectorN x = gen.unit(3);
        EXPECT_LT(distance(c.eval(x), a.eval(b.eval(x))), 1e-14);
        EXPECT_LT(distance(ci.eval(c.eval(x)), x), 1e-12);
        EXPECT_LT(distance(c.eval_inverse(c.eval(x)), x), 1e-12);
    }
}

// --- disk maps ------------------------------------------------------------------------

TEST(DiskMap, TwistBasics) {
    oracle::Gen gen(43);
    const DiskMap g = twist(1.2, 3);
    EXPECT_EQ(g.eval(VectorN(3)), VectorN(3));
    for (int i = 0; i < 1000; ++i) {
        const VectorN x = gen.in_ball(3, 1.5);
        const VectorN y = g.eval(x);
        EXPECT_NEAR(norm(y), norm(x), 1e-14);
        if (norm(x) >= 1.0) {
            EXPECT_EQ(y, x);
        }
        EXPECT_LT(distance(g.eval_inverse(y), x), 1e-14);
    }
    EXPECT_TRUE(make_twist_disk_map(AngleProfile::zero(), 0, 1, 2).is_identity());
    EXPECT_EQ(code_of([] { (void)make_twist_disk_map(AngleProfile::smoothstep(1.0, 1.5), 0, 1, 2); }),
              Errc::support_violation);
    EXPECT_EQ(code_of([] { (void)make_twist_disk_map(AngleProfile::smoothstep(1.0), 1, 1, 2); }), Errc::invalid_plane);
}

TEST(DiskMap, TwistConstantMatchesJacobianSampling) {
    // Dense finite-difference Jacobians over the disk approach the claimed
    // constant from below.
    for (double amplitude : {0.3, 1.0, 2.5}) {
        const DiskMap g = twist(amplitude);
        const MapExpr m = disk_replication(g);
        double worst = 1.0;
        for (int i = 1; i < 400; ++i) {
            const double r = i / 400.0;
            for (int k = 0; k < 8; ++k) {
                const double a = 2.0 * std::numbers::pi * k / 8.0;
                const MatrixN j = jacobian_fd(m, VectorN{r * std::cos(a), r * std::sin(a)}, 1e-7);
                worst = std::max({worst, operator_norm(j), 1.0 / min_singular_value(j)});
            }
        }
        const double claim = g.lambda_theoretical().value();
        const double s = AngleProfile::smoothstep(amplitude).sup_abs_r_derivative();
        EXPECT_NEAR(claim, oracle::twist_constant_from_shear(s), 1e-14);
        EXPECT_LE(worst, claim * (1.0 + 1e-6));
        EXPECT_GE(worst, claim * (1.0 - 1e-3));
    }
}

TEST(DiskMap, PlDiskMap) {
    const PLMap f = pl_twist_example(2, 8, 0.5);
    const DiskMap g = DiskMap::pl(f);
    EXPECT_NEAR(g.lambda_theoretical().value(), pl_bilip_constant(f), 1e-15);
    oracle::Gen gen(44);
    for (int i = 0; i < 500; ++i) {
        const VectorN x = gen.in_ball(2, 1.2);
        const VectorN y = g.eval(x);
        if (norm(x) >= 1.0) {
            EXPECT_EQ(y, x);
        }
        EXPECT_LT(distance(g.eval_inverse(y), x), 1e-12);
    }
    const Triangulation t = kuhn_triangulation(2, -1.0, 1.0, 2);
    EXPECT_EQ(code_of([&] { (void)DiskMap::pl(PLMap::affine(t, MatrixN::identity(2), VectorN(2))); }),
              Errc::support_violation);
}

// --- replication -------------------------------------------------------------------------

TEST(Replication, LocateDisk) {
    EXPECT_EQ(locate_replication_disk(VectorN{0.5, 0.0}), 0);
    EXPECT_EQ(locate_replication_disk(VectorN{4.0, 0.0}), 1);
    EXPECT_EQ(locate_replication_disk(VectorN{1.5, 0.0}), std::nullopt);
    EXPECT_EQ(locate_replication_disk(VectorN{16.0, 3.9}), 2);
    EXPECT_EQ(locate_replication_disk(VectorN{0.0, 50.0}), std::nullopt);
    // Disk boundaries are inside their disks.
    EXPECT_EQ(locate_replication_disk(VectorN{6.0, 0.0}), 1);
    EXPECT_EQ(locate_replication_disk(VectorN{2.0, 0.0}), 1);
}

TEST(Replication, DisksAreDisjoint) {
    // C_j and C_{j+1}: centers 4^j and 4^{j+1}, gap 3 4^j - 3 2^j > 0 for j >= 1.
    for (int j = 1; j < 30; ++j) {
        const double gap = std::ldexp(3.0, 2 * j) - replication_radius(j) - replication_radius(j + 1);
        EXPECT_GT(gap, 0.0);
    }
    EXPECT_GT(4.0 - 2.0 - 1.0, 0.0);
}

TEST(Replication, PsiEvaluation) {
    const DiskMap g = twist(0.9);
    const MapExpr p = disk_replication(g);
    const VectorN x0{0.3125, 0.1875};
    const VectorN gx0 = g.eval(x0);
    EXPECT_EQ(p.eval(VectorN{1.5, 0.0}), (VectorN{1.5, 0.0}));
    EXPECT_EQ(p.eval(x0), gx0);
    const VectorN v = VectorN{16.0, 0.0} + x0 * 4.0;
    const VectorN expect = VectorN{16.0, 0.0} + gx0 * 4.0;
    EXPECT_LT(distance(p.eval(v), expect), 1e-14);
    for (int j = 0; j < 20; ++j) {
        const VectorN w = replication_rho(j, x0);
        EXPECT_LT(distance(p.eval(w), replication_rho(j, gx0)), 1e-15 * std::ldexp(1.0, 2 * j + 1));
    }
    EXPECT_EQ(disk_replication(DiskMap::identity(2)).eval(VectorN{4.5, 1.0}), (VectorN{4.5, 1.0}));
}

TEST(Replication, PsiRoundTrip) {
    const MapExpr p = disk_replication(twist(1.7));
    oracle::Gen gen(45);
    for (int i = 0; i < 10000; ++i) {
        const VectorN v = gen.in_ball(2, 300.0);
        EXPECT_LT(distance(p.eval(p.eval_inverse(v)), v), 1e-9 * std::max(1.0, norm(v)));
    }
}

TEST(Replication, PsiDisplacementIsExactAtLargeScale) {
    const DiskMap g = twist(0.9);
    const MapExpr p = disk_replication(g);
    const VectorN x0{0.3125, 0.1875};
    const double base = norm(g.eval(x0) - x0);
    for (int k = 1; k <= 40; ++k) {
        const double d = norm(p.displacement(replication_rho(k, x0)));
        EXPECT_NEAR(d, std::ldexp(base, k), 1e-12 * std::ldexp(base, k)) << k;
    }
}

TEST(Translated, UniformAndList) {
    const DiskMap g = twist(0.8);
    const MapExpr phi = translated_replication_uniform(g);
    const VectorN x0{0.25, -0.5};
    const VectorN gx0 = g.eval(x0);
    for (double j : {0.0, 3.0, 1e6}) {
        const VectorN v{2.0 * j + x0[0], x0[1]};
        const VectorN w = phi.eval(v);
        EXPECT_NEAR(w[0], 2.0 * j + gx0[0], 1e-9);
        EXPECT_NEAR(w[1], gx0[1], 1e-9);
    }
    for (int j = -5; j < 50; ++j) {
        const VectorN fixed{2.0 * j + 1.0, 0.0};
        EXPECT_EQ(phi.eval(fixed), fixed);
    }
    const MapExpr list = translated_replication({g, DiskMap::identity(2), g});
    EXPECT_EQ(list.eval(VectorN{6.25, 0.0}), (VectorN{6.25, 0.0}));  // beyond the list
    EXPECT_EQ(list.eval(VectorN{2.25, 0.0}), (VectorN{2.25, 0.0}));  // identity factor
    EXPECT_NE(list.eval(VectorN{4.25, 0.1}), (VectorN{4.25, 0.1}));
}

TEST(Translated, FixedSetIsOneDense) {
    const MapExpr phi = translated_replication_uniform(twist(1.1));
    // Moved points lie in the open disks D(2j e_1, 1) whose boundaries are fixed,
    // so every point is within distance 1 of the fixed set.
    for (double x = -3.0; x <= 20.0; x += 0.1) {
        for (double y = -2.0; y <= 2.0; y += 0.1) {
            const VectorN v{x, y};
            if (phi.eval(v) == v) continue;
            const double center = 2.0 * std::round(x / 2.0);
            EXPECT_GE(center, 0.0);
            EXPECT_LT(std::hypot(x - center, y), 1.0);
        }
    }
}

TEST(Translated, DisjointFactorsCommute) {
    const DiskMap g = twist(0.8);
    const DiskMap h = twist(-1.3);
    const DiskMap id = DiskMap::identity(2);
    const MapExpr a = translated_replication({g, id, id});
    const MapExpr b = translated_replication({id, id, h});
    oracle::Gen gen(46);
    for (int i = 0; i < 2000; ++i) {
        const VectorN v = gen.vector(2, -2.0, 7.0);
        EXPECT_EQ(a.eval(b.eval(v)), b.eval(a.eval(v)));
    }
}

// --- other constructors --------------------------------------------------------------

TEST(Radial, ExtensionProperties) {
    oracle::Gen gen(47);
    const SphereMap phi = make_latitude_sphere_map(0.5, VectorN{1.0, 0.0});
    const MapExpr m = radial_extension(phi);
    EXPECT_EQ(m.eval(VectorN(2)), VectorN(2));
    EXPECT_NEAR(m.lambda_theoretical().value(), 1.0 + phi.lambda_theoretical().value(), 1e-15);
    for (int i = 0; i < 10000; ++i) {
        const VectorN v = gen.in_ball(2, 100.0);
        EXPECT_NEAR(norm(m.eval(v)), norm(v), 1e-12 * std::max(1.0, norm(v)));
    }
    const VectorN x = VectorN{0.6, 0.8};
    const double base = distance(phi.eval(x), x);
    for (double r : {0.5, 2.0, 64.0, 1e6}) EXPECT_NEAR(norm(m.displacement(x * r)), r * base, 1e-12 * r);
    const MapExpr rot = radial_extension(SphereMap::orthogonal(rotation_matrix(0, 1, std::numbers::pi / 2.0, 2)));
    const VectorN y = rot.eval(VectorN{2.0, 0.0});
    EXPECT_NEAR(y[0], 0.0, 1e-15);
    EXPECT_NEAR(y[1], 2.0, 1e-15);
}

TEST(Product, CoordinatesAndDriftIdentity) {
    const MapExpr f = radial_extension(make_latitude_sphere_map(0.5, VectorN{1.0, 0.0}));
    const MapExpr g = spiral_map(SpiralProfile::log_spiral(1.0, 0, 1, 2));
    const MapExpr h = product_map(f, g);
    ASSERT_EQ(h.dim(), 4);
    oracle::Gen gen(48);
    for (int i = 0; i < 10000; ++i) {
        const VectorN x = gen.vector(2, -5.0, 5.0);
        const VectorN y = gen.vector(2, -5.0, 5.0);
        const VectorN v = concat(x, y);
        EXPECT_EQ(h.eval(v), concat(f.eval(x), g.eval(y)));
        const VectorN d = h.eval(v) - v;
        const double l1 = norm(slice(d, 0, 2)) + norm(slice(d, 2, 2));
        EXPECT_NEAR(l1, norm(f.eval(x) - x) + norm(g.eval(y) - y), 1e-12);
    }
    EXPECT_EQ(h.lambda_theoretical(), std::max(f.lambda_theoretical(), g.lambda_theoretical()));
}

TEST(Spiral, Profiles) {
    const SpiralProfile p = SpiralProfile::log_spiral(std::numbers::pi / 2.0, 0, 1, 2);
    const MapExpr m = spiral_map(p);
    const VectorN y = m.eval(VectorN{std::numbers::e, 0.0});
    EXPECT_NEAR(y[0], 0.0, 1e-12);
    EXPECT_NEAR(y[1], std::numbers::e, 1e-12);
    EXPECT_EQ(m.eval(VectorN(2)), VectorN(2));
    EXPECT_EQ(SpiralProfile::constant(rotation_matrix(0, 2, 0.4, 3)).c_bound(), 0.0);
    EXPECT_EQ(SpiralProfile::log_spiral(-2.0, 0, 1, 3).c_bound(), 2.0);
    EXPECT_NEAR(spiral_map(SpiralProfile::log_spiral(1.0, 0, 1, 2)).lambda_theoretical().value(), 3.0, 1e-15);
    const double reflect[] = {1.0, 0.0, 0.0, -1.0};
    EXPECT_EQ(code_of([&] { (void)SpiralProfile::constant(MatrixN::from_row_major(2, reflect)); }),
              Errc::invalid_matrix);
}

TEST(Spiral, DerivativeBoundOnLogGrid) {
    // t |f'_{ij}(t)| <= C by central differences on t in [1e-3, 1e6].
    const std::vector<SpiralProfile> profiles{
        SpiralProfile::log_spiral(0.5, 0, 1, 2), SpiralProfile::log_spiral(2.0, 0, 2, 3),
        SpiralProfile::cutoff(AngleProfile({{0.0, 1.0, 0.0}, {0.5, 0.3, -1.0}, {2.0, 0.0, 0.0}}), 0, 1, 2)};
    for (const SpiralProfile& p : profiles) {
        for (double e = -3.0; e <= 6.0; e += 0.01) {
            const double t = std::pow(10.0, e);
            const double h = 1e-6 * t;
            const MatrixN d = (p.at(t + h) - p.at(t - h)) * (1.0 / (2.0 * h));
            const MatrixN a = p.at(t);
            EXPECT_LT(frobenius_norm(a.transpose() * a - MatrixN::identity(p.dim())), 1e-12);
            EXPECT_NEAR(determinant(a), 1.0, 1e-12);
            for (int i = 0; i < p.dim(); ++i)
                for (int j = 0; j < p.dim(); ++j) EXPECT_LE(t * std::abs(d(i, j)), p.c_bound() * (1.0 + 1e-6) + 1e-9);
        }
    }
}

TEST(Spiral, NormPreservingAndInvertible) {
    const MapExpr m = spiral_map(SpiralProfile::log_spiral(1.3, 1, 2, 3));
    oracle::Gen gen(49);
    for (int i = 0; i < 10000; ++i) {
        const VectorN x = gen.in_ball(3, 1000.0);
        EXPECT_NEAR(norm(m.eval(x)), norm(x), 1e-12 * std::max(1.0, norm(x)));
        EXPECT_LT(distance(m.eval_inverse(m.eval(x)), x), 1e-9 * std::max(1.0, norm(x)));
    }
}

TEST(Spiral, JacobianWithinBound) {
    oracle::Gen gen(50);
    for (double c : {0.5, 1.0, 2.0}) {
        const MapExpr m = spiral_map(SpiralProfile::log_spiral(c, 0, 1, 2));
        for (int i = 0; i < 200; ++i) {
            const VectorN x = gen.in_ball(2, 50.0);
            if (norm(x) < 1e-3) continue;
            EXPECT_LE(operator_norm(jacobian_fd(m, x)), 2.0 * c + 1.0 + 1e-3);
        }
    }
}

TEST(MapExpr, AffineComposeInverse) {
    const double d[] = {2.0, 2.0};
    const MapExpr a = MapExpr::affine(MatrixN::diagonal(d), VectorN(2));
    EXPECT_EQ(a.eval_inverse(VectorN{2.0, 0.0}), (VectorN{1.0, 0.0}));
    const MapExpr g = disk_replication(twist(0.7));
    const MapExpr c = compose(MapExpr::identity(2), g);
    oracle::Gen gen(51);
    for (int i = 0; i < 1000; ++i) {
        const VectorN v = gen.in_ball(2, 30.0);
        EXPECT_EQ(c.eval(v), g.eval(v));
        EXPECT_LT(distance(inverse(g).eval(g.eval(v)), v), 1e-12 * std::max(1.0, norm(v)));
        EXPECT_EQ(compose(a, g).eval(v), a.eval(g.eval(v)));
    }
    EXPECT_EQ(code_of([&] { (void)compose(MapExpr::identity(3), g); }), Errc::dim_mismatch);
    EXPECT_EQ(code_of([&] { (void)g.eval(VectorN{std::nan(""), 0.0}); }), Errc::invalid_point);
}

TEST(MapExpr, PsiHomomorphism) {
    const DiskMap g = twist(0.9);
    const DiskMap h = make_twist_disk_map(AngleProfile({{0.0, -0.5, 0.0}, {0.6, 0.2, 0.0}, {1.0, 0.0, 0.0}}), 0, 1, 2);
    const MapExpr lhs = disk_replication(DiskMap::composed({g, h}, 2));
    const MapExpr rhs = compose(disk_replication(g), disk_replication(h));
    oracle::Gen gen(52);
    for (int i = 0; i < 10000; ++i) {
        const VectorN v = gen.in_ball(2, 300.0);
        EXPECT_LT(distance(lhs.eval(v), rhs.eval(v)), 1e-9);
    }
}

TEST(MapExpr, JacobianOfAffine) {
    oracle::Gen gen(53);
    const MatrixN m = gen.matrix(3, -2.0, 2.0);
    const MapExpr a = MapExpr::affine(m, gen.vector(3, -1.0, 1.0));
    const MatrixN j = jacobian_fd(a, gen.vector(3, -5.0, 5.0));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(j(r, c), m(r, c), 1e-8);
    const MatrixN ji = jacobian_fd(MapExpr::identity(3), VectorN{1.0, 2.0, 3.0});
    EXPECT_LT(frobenius_norm(ji - MatrixN::identity(3)), 1e-9);
}
