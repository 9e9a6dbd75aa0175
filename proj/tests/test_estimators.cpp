#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "qimaps/estimators.hpp"

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

MapExpr diag31() {
    const double d[] = {3.0, 1.0};
    return MapExpr::affine(MatrixN::diagonal(d), VectorN(2));
}

SamplerConfig unit_ball(std::size_t n, std::uint64_t seed = 5) {
    SamplerConfig s;
    s.seed = seed;
    s.region = Region::ball(2, 1.0);
    s.n_pairs = n;
    return s;
}

MapExpr replicated_twist() { return disk_replication(make_twist_disk_map(AngleProfile::smoothstep(0.7), 0, 1, 2)); }

}  // namespace

TEST(Bilip, IdentityIsExactlyOne) {
    const BilipEstimate e = bilip_lower_bound(MapExpr::identity(2), unit_ball(20000));
    EXPECT_EQ(e.lambda_lower, 1.0);
    EXPECT_EQ(e.n_pairs_used, 20000u);
}

TEST(Bilip, StretchIsFoundAlongTheStretchedAxis) {
    const BilipEstimate e = bilip_lower_bound(diag31(), unit_ball(100000));
    EXPECT_GE(e.lambda_lower, 2.99);
    EXPECT_LE(e.lambda_lower, 3.0 + 1e-12);
    const auto w = falsify_bilip_bound(diag31(), 2.0, unit_ball(20000));
    ASSERT_TRUE(w.has_value());
    const VectorN d = w->x - w->y;
    // ratio^2 = 9c^2 + (1 - c^2) > 4 forces c^2 > 3/8 for c the cosine to e_1.
    EXPECT_GT(d[0] * d[0] / dot(d, d), 3.0 / 8.0);
    EXPECT_NEAR(w->ratio, distance(diag31().eval(w->x), diag31().eval(w->y)) / distance(w->x, w->y), 1e-12);
    EXPECT_FALSE(falsify_bilip_bound(diag31(), 3.01, unit_ball(20000)).has_value());
}

TEST(Bilip, DeterministicPrefixMonotoneAndThreadIndependent) {
    SamplerConfig s;
    s.seed = 11;
    s.region = Region::ball(2, 40.0);
    const MapExpr m = replicated_twist();
    double prev = 1.0;
    for (std::size_t n : {100u, 1000u, 10000u, 40000u}) {
        s.n_pairs = n;
        s.exec = Exec::parallel;
        const BilipEstimate p = bilip_lower_bound(m, s);
        const BilipEstimate again = bilip_lower_bound(m, s);
        s.exec = Exec::serial;
        const BilipEstimate q = bilip_lower_bound(m, s);
        EXPECT_EQ(p.lambda_lower, again.lambda_lower);
        EXPECT_EQ(p.lambda_lower, q.lambda_lower);
        EXPECT_EQ(p.worst.x, q.worst.x);
        EXPECT_EQ(p.worst.y, q.worst.y);
        EXPECT_GE(p.lambda_lower, prev);
        EXPECT_LE(p.lambda_lower, *m.lambda_theoretical() * (1.0 + 1e-9));
        prev = p.lambda_lower;
    }
    for (std::size_t i = 0; i < 100; ++i) {
        s.n_pairs = 100;
        const PointPair a = sample_pair(m, s, "bilip_lower_bound", i);
        s.n_pairs = 40000;
        const PointPair b = sample_pair(m, s, "bilip_lower_bound", i);
        EXPECT_EQ(a.x, b.x);
        EXPECT_EQ(a.y, b.y);
    }
}

TEST(Bilip, SeedChangesTheStream) {
    SamplerConfig s = unit_ball(10);
    const PointPair a = sample_pair(MapExpr::identity(2), s, "op", 3);
    s.seed = 6;
    const PointPair b = sample_pair(MapExpr::identity(2), s, "op", 3);
    EXPECT_NE(a.x, b.x);
}

TEST(Sampler, Validation) {
    const MapExpr id = MapExpr::identity(2);
    SamplerConfig s = unit_ball(100);
    s.mix = {0.5, 0.3, 0.1};
    EXPECT_EQ(code_of([&] { (void)bilip_lower_bound(id, s); }), Errc::invalid_argument);
    s.mix = {1.2, -0.2, 0.0};
    EXPECT_EQ(code_of([&] { (void)bilip_lower_bound(id, s); }), Errc::invalid_argument);
    s = unit_ball(0);
    EXPECT_EQ(code_of([&] { (void)bilip_lower_bound(id, s); }), Errc::invalid_argument);
    s = unit_ball(100);
    EXPECT_EQ(code_of([] { (void)Region::ball(2, 0.0); }), Errc::empty_region);
    EXPECT_EQ(code_of([] { (void)Region::ball(2, 1.0, 1.0); }), Errc::empty_region);
    EXPECT_EQ(code_of([] { (void)Region::box(2, 1.0, 1.0); }), Errc::empty_region);
    s.region = Region::ball(3, 1.0);
    EXPECT_EQ(code_of([&] { (void)bilip_lower_bound(id, s); }), Errc::dim_mismatch);
    EXPECT_EQ(code_of([&] { (void)falsify_bilip_bound(id, 0.5, unit_ball(10)); }), Errc::invalid_argument);
}

TEST(Sampler, RegionSamplesStayInside) {
    Xoshiro256 rng(3);
    for (const Region& r : {Region::ball(3, 2.0, 1.0), Region::box(2, -1.0, 4.0), Region::ball(5, 0.5)}) {
        for (int i = 0; i < 2000; ++i) EXPECT_TRUE(r.contains(r.sample(rng))) << r.describe();
    }
    EXPECT_EQ(Region::ball(2, 3.0).describe(), "ball:3");
    EXPECT_EQ(Region::ball(2, 3.0, 1.0).describe(), "annulus:1:3");
    EXPECT_EQ(Region::box(2, -1.0, 2.0).describe(), "box:-1:2");
}

TEST(Qi, IdentityPassesAndStretchFails) {
    const QiCheck ok = qi_embedding_check(MapExpr::identity(2), QiParams{}, unit_ball(5000));
    EXPECT_TRUE(ok.pass);
    EXPECT_LE(ok.worst_margin, 0.0);
    EXPECT_EQ(ok.violations, 0u);

    QiParams two;
    two.lambda = 2.0;
    const QiCheck bad = qi_embedding_check(diag31(), two, unit_ball(5000));
    EXPECT_FALSE(bad.pass);
    EXPECT_GT(bad.violations, 0u);
    EXPECT_GT(bad.worst_margin, 0.0);

    QiParams three;
    three.lambda = 3.0;
    EXPECT_TRUE(qi_embedding_check(diag31(), three, unit_ball(5000)).pass);

    // Additive slack absorbs the stretch on a bounded region.
    QiParams slack;
    slack.lambda = 2.0;
    slack.eps = 10.0;
    EXPECT_TRUE(qi_embedding_check(diag31(), slack, unit_ball(5000)).pass);
}

TEST(Qi, ProductMetric) {
    EXPECT_DOUBLE_EQ(metric_distance(VectorN{1.0, 2.0, 3.0}, VectorN(3), Metric::l1, 1), 1.0 + std::sqrt(13.0));
    EXPECT_DOUBLE_EQ(metric_distance(VectorN{3.0, 4.0}, VectorN(2), Metric::euclidean, 0), 5.0);
}

TEST(Density, IdentityCoveringRadius) {
    for (int n : {1, 2, 3}) {
        const double h = 0.25;
        const DensityResult r = c_density(MapExpr::identity(n), Region::box(n, -1.0, 1.0), h);
        EXPECT_NEAR(r.c, h * std::sqrt(static_cast<double>(n)) / 2.0, 1e-12) << n;
        EXPECT_GT(r.n_targets, 0u);
        const DensityResult s = c_density(MapExpr::identity(n), Region::box(n, -1.0, 1.0), h, 0.0, Exec::serial);
        EXPECT_EQ(r.c, s.c);
    }
    // A translation by half a step leaves the lattice image dense once the margin covers it.
    const MapExpr shift = MapExpr::affine(MatrixN::identity(2), VectorN{0.125, 0.0});
    EXPECT_NEAR(c_density(shift, Region::box(2, -1.0, 1.0), 0.25, 1.0).c, 0.125, 1e-12);
}

TEST(Drift, PsiWitnessesGrowGeometrically) {
    const AngleProfile theta = AngleProfile::smoothstep(0.7);
    const DiskMap g = make_twist_disk_map(theta, 0, 1, 2);
    const VectorN x0{0.3125, 0.1875};
    const std::vector<VectorN> w = psi_drift_witnesses(g, x0, 2);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[0], (VectorN{4.0 + 2.0 * 0.3125, 2.0 * 0.1875}));
    EXPECT_EQ(w[1], (VectorN{16.0 + 4.0 * 0.3125, 4.0 * 0.1875}));

    const std::vector<VectorN> ws = psi_drift_witnesses(g, x0, 30);
    const DriftReport rep = drift_profile(disk_replication(g), ws, 1e6);
    // A rotation by theta(|x0|) moves x0 by 2 |x0| sin(theta / 2); Psi scales this by 2^k.
    const double base = 2.0 * norm(x0) * std::sin(std::abs(theta(norm(x0))) / 2.0);
    for (int k = 1; k <= 30; ++k) {
        EXPECT_NEAR(rep.drifts[static_cast<std::size_t>(k - 1)], std::ldexp(base, k), std::ldexp(base, k) * 1e-12);
    }
    EXPECT_EQ(rep.verdict, DriftVerdict::exceeds);
    EXPECT_EQ(drift_profile(disk_replication(g), psi_drift_witnesses(g, x0, 10), 1e6).verdict, DriftVerdict::bounded);

    EXPECT_EQ(code_of([&] { (void)psi_drift_witnesses(g, VectorN(2), 5); }), Errc::trivial_witness);
    EXPECT_EQ(code_of([&] { (void)psi_drift_witnesses(g, VectorN{1.0, 0.0}, 5); }), Errc::invalid_point);
}

TEST(Drift, RadialDriftDoublesAlongRays) {
    const MapExpr f = radial_extension(make_latitude_sphere_map(0.5, VectorN{0.0, 1.0}));
    const DriftReport rep = drift_profile(f, ray_witnesses(VectorN{0.6, 0.3}, 20), 1e3);
    for (std::size_t k = 1; k < rep.drifts.size(); ++k) EXPECT_NEAR(rep.drifts[k] / rep.drifts[k - 1], 2.0, 1e-12);
    EXPECT_EQ(rep.verdict, DriftVerdict::exceeds);
    // The identity never drifts.
    EXPECT_EQ(drift_profile(MapExpr::identity(2), ray_witnesses(VectorN{1.0, 0.0}, 20), 0.0).verdict,
              DriftVerdict::bounded);
}

TEST(Drift, SpiralWitnesses) {
    const MatrixN half_turn = MatrixN::from_rows({{-1.0, 0.0}, {0.0, -1.0}});
    const SpiralProfile r = SpiralProfile::constant(half_turn);
    const std::vector<VectorN> w = spiral_drift_witnesses(r, 12);
    ASSERT_EQ(w.size(), 12u);
    const DriftReport rep = drift_profile(spiral_map(r), w, 1e3);
    for (int k = 1; k <= 12; ++k) {
        const double len = norm(w[static_cast<std::size_t>(k - 1)]);
        EXPECT_GE(len, std::ldexp(1.0, k) * (1.0 - 1e-12));
        EXPECT_LT(len, std::ldexp(1.0, k + 1));
        EXPECT_NEAR(rep.drifts[static_cast<std::size_t>(k - 1)], 2.0 * len, 2.0 * len * 1e-12);
    }
    EXPECT_EQ(rep.verdict, DriftVerdict::exceeds);

    EXPECT_EQ(code_of([] { (void)spiral_drift_witnesses(SpiralProfile::constant(MatrixN::identity(3)), 10); }),
              Errc::no_witness);
    EXPECT_EQ(code_of([] {
                  (void)spiral_drift_witnesses(SpiralProfile::cutoff(AngleProfile::smoothstep(1.0, 4.0), 0, 1, 2), 10);
              }),
              Errc::no_witness);
    // The log spiral keeps rotating at every scale.
    EXPECT_EQ(spiral_drift_witnesses(SpiralProfile::log_spiral(1.0, 0, 1, 2), 10).size(), 10u);
}

TEST(Drift, VerdictNeedsGrowth) {
    const std::vector<VectorN> w = ray_witnesses(VectorN{1.0, 0.0}, 6);
    const MapExpr shift = MapExpr::affine(MatrixN::identity(2), VectorN{5.0, 0.0});
    // Constant drift above the threshold does not count as unbounded growth.
    EXPECT_EQ(drift_profile(shift, w, 1.0).verdict, DriftVerdict::bounded);
}

TEST(SphereBilip, OrthogonalIsOneAndLatitudeIsBounded) {
    oracle::Gen gen(13);
    const BilipEstimate o = sphere_bilip_lower_bound(SphereMap::orthogonal(gen.rotation(3)), 3, 20000);
    // Local pairs down to 1e-7 apart carry relative rounding near 1e-9.
    EXPECT_NEAR(o.lambda_lower, 1.0, 1e-7);
    for (double beta : {0.25, 0.5, -0.5}) {
        const BilipEstimate e = sphere_bilip_lower_bound(make_latitude_sphere_map(beta, VectorN{0.0, 0.0, 1.0}), 3, 40000);
        const SphereMap phi = make_latitude_sphere_map(beta, VectorN{0.0, 0.0, 1.0});
        // The local stretch at the poles attains the geodesic constant.
        EXPECT_GT(e.lambda_lower, latitude_geodesic_claim(beta) * (1.0 - 1e-3));
        EXPECT_LE(e.lambda_lower, *phi.lambda_theoretical() * (1.0 + 1e-9));
    }
}
