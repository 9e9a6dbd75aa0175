#pragma once

// Sampled certification of the constructions: bi-Lipschitz lower bounds,
// refutation of claimed bounds, quasi-isometry checks, C-density, drift
// witnesses and length-metric estimates on point clouds.
//
// Every estimator is a pure function of its inputs. Pair i of an invocation is
// drawn from its own stream keyed by (seed, operation name, i), and results are
// combined with order-independent reductions, so serial and parallel runs agree
// bit for bit.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qimaps/core.hpp"
#include "qimaps/kernels.hpp"
#include "qimaps/maps.hpp"
#include "qimaps/rng.hpp"

namespace qimaps {

/// Sampling region: a ball (optionally an annulus, inner_radius > 0) or an
/// axis-aligned box [lo, hi]^n.
struct Region {
    enum class Kind { ball, box };
    Kind kind = Kind::ball;
    VectorN center;
    double radius = 1.0;
    double inner_radius = 0.0;
    double lo = -1.0;
    double hi = 1.0;

    static Region ball(const VectorN& center, double radius, double inner_radius = 0.0);
    static Region ball(int dim, double radius, double inner_radius = 0.0);
    static Region box(int dim, double lo, double hi);

    int dim() const noexcept { return center.dim(); }
    /// Throws empty_region for a degenerate region.
    void validate() const;
    bool contains(const VectorN& x) const noexcept;
    /// Uniform by volume.
    VectorN sample(Xoshiro256& rng) const;
    /// Largest distance of a region point from the origin.
    double outer_extent() const noexcept;
    std::string describe() const;
};

/// Fractions of global pairs, local pairs (x, x + h u with h = 1e-3 max(|x|, 1e-9))
/// and construction-aware witness pairs.
struct Mix {
    double global = 0.5;
    double local = 0.3;
    double witness = 0.2;
};

struct SamplerConfig {
    std::uint64_t seed = 0;
    Region region;
    std::size_t n_pairs = 100000;
    Mix mix;
    Exec exec = Exec::parallel;

    /// Throws invalid_argument unless the fractions are nonnegative and sum to 1
    /// (to 1e-12) and n_pairs >= 1; empty_region for a degenerate region.
    void validate() const;
};

struct PointPair {
    VectorN x, y;
};

/// Pair i of the sample stream of `op` for map m. Exposed for tests and for
/// scenario code that needs to reproduce individual witness pairs.
PointPair sample_pair(const MapExpr& m, const SamplerConfig& s, std::string_view op, std::size_t i);

struct PairWitness {
    VectorN x, y;
    /// |f(x) - f(y)| / |x - y| in the metric of the check.
    double ratio = 1.0;
};

struct BilipEstimate {
    double lambda_lower = 1.0;
    PairWitness worst;
    std::size_t n_pairs_used = 0;
    std::uint64_t seed = 0;
};

/// max over sampled pairs of max(r, 1/r). Pairs closer than 1e-12 are skipped;
/// throws insufficient_samples if every pair is skipped.
BilipEstimate bilip_lower_bound(const MapExpr& m, const SamplerConfig& s);

/// The worst sampled pair whose score exceeds lambda_claim (1 + 1e-6), if any.
/// Absence of a witness is not a proof.
std::optional<PairWitness> falsify_bilip_bound(const MapExpr& m, double lambda_claim, const SamplerConfig& s);

/// Euclidean, or the product metric |a_1| + |a_2| with a = (a_1, a_2) split at
/// `l1_split` coordinates.
enum class Metric { euclidean, l1 };

struct QiParams {
    double lambda = 1.0;
    double eps = 0.0;
    Metric metric = Metric::euclidean;
    int l1_split = 0;
    std::optional<double> c_density;
};

double metric_distance(const VectorN& a, const VectorN& b, Metric metric, int l1_split);

struct QiCheck {
    bool pass = true;
    /// max over pairs of the violation of either inequality divided by
    /// lambda d + eps; <= 0 when all pairs satisfy both inequalities.
    double worst_margin = 0.0;
    PairWitness worst;
    std::size_t n_pairs_used = 0;
    std::size_t violations = 0;
};

/// Checks (1/lambda) d(x,y) - eps <= d(f x, f y) <= lambda d(x,y) + eps on sampled
/// pairs; a pair violates when its margin exceeds 1e-6.
QiCheck qi_embedding_check(const MapExpr& m, const QiParams& q, const SamplerConfig& s);

struct DensityResult {
    double c = 0.0;
    VectorN worst_target;
    std::size_t n_targets = 0;
    std::size_t n_domain = 0;
};

/// Covering radius of the image of a domain lattice: targets are the centers of
/// the grid cells of step h covering the region, domain points the lattice
/// vertices of step h over the region enlarged by `margin`. For the identity
/// the result is h sqrt(n) / 2.
DensityResult c_density(const MapExpr& m, const Region& region, double grid_step, double margin = 0.0,
                        Exec exec = Exec::parallel);

enum class DriftVerdict { bounded, exceeds };

struct DriftReport {
    std::vector<VectorN> witnesses;
    std::vector<double> drifts;
    double threshold = 0.0;
    DriftVerdict verdict = DriftVerdict::bounded;
};

/// drift_k = |f(x_k) - x_k| (computed through MapExpr::displacement). Verdict is
/// `exceeds` iff the last drift is above the threshold and the drifts increase
/// strictly over the final min(5, K) entries.
DriftReport drift_profile(const MapExpr& m, const std::vector<VectorN>& witnesses, double threshold);

/// 4^k e_1 + 2^k x0 for k = 1..K. Throws trivial_witness if g(x0) = x0, and
/// invalid_point unless |x0| < 1.
std::vector<VectorN> psi_drift_witnesses(const DiskMap& g, const VectorN& x0, int K);

/// Points x_k of norm r_k = 2^k (k = 1..K) on which f(r_k) moves x_k the most:
/// each x_k is a unit top eigenvector of 2I - A - A^T for A = f(t_k) at the
/// sampled t_k in [2^k, 2^(k+1)) where |A - I| is largest, scaled to |x| = t_k.
/// Throws no_witness when the rotation angle is below 1e-6 at the final
/// min(5, K) scales (the profile is the identity far out).
std::vector<VectorN> spiral_drift_witnesses(const SpiralProfile& p, int K);

/// 2^k x for k = 1..K: witnesses along a ray, for maps commuting with dilation.
std::vector<VectorN> ray_witnesses(const VectorN& x, int K);

/// Estimated chordal bi-Lipschitz constant of a sphere map from sampled pairs on
/// the sphere (global, local, and pairs near the poles of latitude maps).
BilipEstimate sphere_bilip_lower_bound(const SphereMap& phi, std::uint64_t seed, std::size_t n_pairs,
                                       Exec exec = Exec::parallel);

// --- length metric on point clouds ---------------------------------------------------------

/// Weighted epsilon-neighbourhood graph on a point cloud, edge weights Euclidean.
class EpsGraph {
public:
    /// Throws disconnected_cloud if the graph has more than one component,
    /// invalid_argument for an empty cloud or eps <= 0.
    EpsGraph(std::vector<VectorN> cloud, double eps);

    std::size_t size() const noexcept { return cloud_.size(); }
    std::size_t edge_count() const noexcept { return targets_.size() / 2; }
    double eps() const noexcept { return eps_; }
    const std::vector<VectorN>& cloud() const noexcept { return cloud_; }

    /// Shortest-path lengths from `source` to every point (Dijkstra).
    std::vector<double> distances_from(std::size_t source) const;

private:
    std::vector<VectorN> cloud_;
    double eps_;
    std::vector<std::size_t> offsets_;  // CSR adjacency
    std::vector<std::uint32_t> targets_;
    std::vector<double> weights_;
};

/// Graph length between cloud points i and j.
double geodesic_estimate(const EpsGraph& g, std::size_t i, std::size_t j);

struct MetricRatio {
    double ratio = 1.0;
    std::size_t i = 0, j = 0;
    double geodesic = 0.0;
    double chord = 0.0;
    std::size_t n_sources = 0;
    std::size_t n_pairs = 0;
    /// Pairs with graph length below the chord (beyond rounding); must be 0.
    std::size_t chord_violations = 0;
};

/// max over pairs (source, any cloud point) of graph length / chord, for
/// `n_sources` seeded source points.
MetricRatio metric_equivalence_ratio(const EpsGraph& g, std::size_t n_sources, std::uint64_t seed,
                                     Exec exec = Exec::parallel);

std::vector<VectorN> circle_cloud(std::size_t n_points);
/// Ellipse x^2/a^2 + y^2/b^2 = 1 sampled at equal parameter steps.
std::vector<VectorN> ellipse_cloud(double a, double b, std::size_t n_points);
/// Fibonacci lattice on the unit 2-sphere.
std::vector<VectorN> sphere_cloud(std::size_t n_points);

/// One point per line, comma separated, optional header line starting with a letter.
std::vector<VectorN> read_cloud_csv(std::istream& in);
void write_cloud_csv(std::ostream& out, const std::vector<VectorN>& cloud);

}  // namespace qimaps
