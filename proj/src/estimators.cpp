#include "qimaps/estimators.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace qimaps {

namespace {

constexpr double kMinPairDistance = 1e-12;
constexpr double kClaimTolerance = 1e-6;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

VectorN random_direction(Xoshiro256& rng, int dim) {
    while (true) {
        VectorN d(dim);
        for (int k = 0; k < dim; ++k) d[k] = rng.normal();
        const double n = norm(d);
        if (n > 1e-300) return d / n;
    }
}

double log_uniform(Xoshiro256& rng, double lo, double hi) {
    return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

/// Unit vector at angle `angle` from the unit vector d, in a random tangent direction.
VectorN sphere_neighbour(Xoshiro256& rng, const VectorN& d, double angle) {
    VectorN t = random_direction(rng, d.dim());
    for (int attempt = 0; attempt < 8; ++attempt) {
        const VectorN tangent = t - d * dot(t, d);
        const double n = norm(tangent);
        if (n > 1e-3) {
            t = tangent / n;
            break;
        }
        t = random_direction(rng, d.dim());
    }
    return d * std::cos(angle) + t * std::sin(angle);
}

VectorN local_partner(Xoshiro256& rng, const VectorN& x) {
    const double h = 1e-3 * std::max(norm(x), 1e-9);
    return x + random_direction(rng, x.dim()) * h;
}

// Bi-Lipschitz score max(r, 1/r); -inf marks a skipped pair, NaN becomes +inf.
double bilip_score(double image_distance, double distance) {
    if (!(distance >= kMinPairDistance)) return kNegInf;
    const double r = image_distance / distance;
    if (std::isnan(r)) return std::numeric_limits<double>::infinity();
    return std::max(r, 1.0 / r);
}

// --- construction-aware witness pairs -------------------------------------------------------

enum class Plan { global, radial, psi, phi, product };

struct WitnessPlan {
    Plan plan = Plan::global;
    long long disk_count = 0;  // psi: disks C_0..C_{count-1}; phi: D_0..D_{2(count-1)}
    int split = 0;             // product
};

Plan root_plan(const MapExpr& m) {
    return std::visit(
        [&](const auto& n) -> Plan {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, MapExpr::RadialExt> || std::is_same_v<T, MapExpr::Spiral>) {
                return Plan::radial;
            } else if constexpr (std::is_same_v<T, MapExpr::Psi>) {
                return Plan::psi;
            } else if constexpr (std::is_same_v<T, MapExpr::PhiTranslated>) {
                return Plan::phi;
            } else if constexpr (std::is_same_v<T, MapExpr::Product>) {
                return Plan::product;
            } else if constexpr (std::is_same_v<T, MapExpr::Inverse>) {
                return root_plan(n.inner);
            } else if constexpr (std::is_same_v<T, MapExpr::Compose>) {
                for (auto it = n.parts.rbegin(); it != n.parts.rend(); ++it) {
                    const Plan p = root_plan(*it);
                    if (p != Plan::global) return p;
                }
                return Plan::global;
            } else {
                return Plan::global;
            }
        },
        m.node().v);
}

const MapExpr::PhiTranslated* find_phi(const MapExpr& m) {
    if (const auto* p = std::get_if<MapExpr::PhiTranslated>(&m.node().v)) return p;
    if (const auto* i = std::get_if<MapExpr::Inverse>(&m.node().v)) return find_phi(i->inner);
    if (const auto* c = std::get_if<MapExpr::Compose>(&m.node().v)) {
        for (auto it = c->parts.rbegin(); it != c->parts.rend(); ++it) {
            if (const auto* p = find_phi(*it)) return p;
        }
    }
    return nullptr;
}

int find_split(const MapExpr& m) {
    if (const auto* p = std::get_if<MapExpr::Product>(&m.node().v)) return p->f.dim();
    if (const auto* i = std::get_if<MapExpr::Inverse>(&m.node().v)) return find_split(i->inner);
    if (const auto* c = std::get_if<MapExpr::Compose>(&m.node().v)) {
        for (auto it = c->parts.rbegin(); it != c->parts.rend(); ++it) {
            if (const int k = find_split(*it); k > 0) return k;
        }
    }
    return 0;
}

WitnessPlan make_plan(const MapExpr& m, const Region& region) {
    WitnessPlan w;
    w.plan = root_plan(m);
    const double extent = region.outer_extent();
    switch (w.plan) {
        case Plan::radial:
            if (region.kind != Region::Kind::ball || norm(region.center) != 0.0) w.plan = Plan::global;
            break;
        case Plan::psi: {
            // Disks C_j lying inside the ball of radius `extent`.
            long long count = 0;
            while (count < 200 && std::ldexp(1.0, static_cast<int>(2 * count)) * (count > 0 ? 1.0 : 0.0) +
                                          std::ldexp(1.0, static_cast<int>(count)) <=
                                      extent) {
                ++count;
            }
            w.disk_count = count;
            if (count == 0) w.plan = Plan::global;
            break;
        }
        case Plan::phi: {
            const auto* p = find_phi(m);
            long long count = static_cast<long long>(std::floor((extent - 1.0) / 2.0)) + 1;
            if (p && !p->uniform) count = std::min<long long>(count, static_cast<long long>(p->gs.size()));
            w.disk_count = std::max<long long>(0, std::min<long long>(count, 1'000'000));
            if (w.disk_count == 0) w.plan = Plan::global;
            break;
        }
        case Plan::product:
            w.split = find_split(m);
            if (w.split <= 0 || w.split >= m.dim()) w.plan = Plan::global;
            break;
        case Plan::global:
            break;
    }
    return w;
}

// Point of the closed disk (center, radius): uniform, or concentrated near the
// boundary sphere where piecewise constructions switch.
VectorN disk_point(Xoshiro256& rng, const VectorN& center, double radius) {
    const int dim = center.dim();
    const VectorN d = random_direction(rng, dim);
    double t;
    const double u = rng.uniform();
    if (u < 0.5) {
        t = std::pow(rng.uniform(), 1.0 / dim);
    } else if (u < 0.8) {
        t = 1.0 - std::pow(10.0, rng.uniform(-9.0, 0.0));
    } else {
        t = 1.0 + std::pow(10.0, rng.uniform(-9.0, -0.5));  // just outside
    }
    return center + d * (radius * t);
}

PointPair disk_family_pair(Xoshiro256& rng, int dim, long long count, bool replication) {
    auto center_of = [&](long long j) {
        VectorN c(dim);
        c[0] = replication ? (j > 0 ? std::ldexp(1.0, static_cast<int>(2 * j)) : 0.0) : 2.0 * static_cast<double>(j);
        return c;
    };
    auto radius_of = [&](long long j) { return replication ? std::ldexp(1.0, static_cast<int>(j)) : 1.0; };
    const auto j = static_cast<long long>(rng.below(static_cast<std::uint64_t>(count)));
    const VectorN x = disk_point(rng, center_of(j), radius_of(j));
    const double u = rng.uniform();
    if (u < 0.35) {
        const double h = radius_of(j) * log_uniform(rng, 1e-7, 0.5);
        return {x, x + random_direction(rng, dim) * h};
    }
    if (u < 0.6 || count == 1) return {x, disk_point(rng, center_of(j), radius_of(j))};
    // Cross-disk pair.
    auto k = static_cast<long long>(rng.below(static_cast<std::uint64_t>(count - 1)));
    if (k >= j) ++k;
    return {x, disk_point(rng, center_of(k), radius_of(k))};
}

PointPair radial_pair(Xoshiro256& rng, const Region& region) {
    const int dim = region.dim();
    const double rmax = region.radius;
    const double rmin = region.inner_radius > 0.0 ? region.inner_radius : std::max(rmax * 1e-6, 1e-300);
    const double u = rng.uniform();
    const VectorN d1 = random_direction(rng, dim);
    if (u < 1.0 / 3.0) {
        // Ray pair.
        return {d1 * log_uniform(rng, rmin, rmax), d1 * log_uniform(rng, rmin, rmax)};
    }
    if (u < 2.0 / 3.0) {
        // Same-sphere pair at a random angular scale.
        const double r = log_uniform(rng, rmin, rmax);
        return {d1 * r, sphere_neighbour(rng, d1, log_uniform(rng, 1e-6, 3.0)) * r};
    }
    return {d1 * log_uniform(rng, rmin, rmax), random_direction(rng, dim) * log_uniform(rng, rmin, rmax)};
}

PointPair witness_pair(Xoshiro256& rng, const WitnessPlan& w, const Region& region) {
    switch (w.plan) {
        case Plan::radial:
            return radial_pair(rng, region);
        case Plan::psi:
            return disk_family_pair(rng, region.dim(), w.disk_count, true);
        case Plan::phi:
            return disk_family_pair(rng, region.dim(), w.disk_count, false);
        case Plan::product: {
            const VectorN x = region.sample(rng);
            VectorN y = rng.uniform() < 0.5 ? region.sample(rng) : local_partner(rng, x);
            // Move one factor only.
            const bool keep_first = rng.uniform() < 0.5;
            const int lo = keep_first ? 0 : w.split;
            const int hi = keep_first ? w.split : region.dim();
            for (int k = lo; k < hi; ++k) y[k] = x[k];
            return {x, y};
        }
        case Plan::global:
            break;
    }
    return {region.sample(rng), region.sample(rng)};
}

PointPair draw_pair(Xoshiro256& rng, const WitnessPlan& w, const SamplerConfig& s) {
    const double u = rng.uniform();
    if (u < s.mix.global) return {s.region.sample(rng), s.region.sample(rng)};
    if (u < s.mix.global + s.mix.local) {
        const VectorN x = s.region.sample(rng);
        return {x, local_partner(rng, x)};
    }
    return witness_pair(rng, w, s.region);
}

// Deterministic stream of pairs of one estimator invocation.
class PairStream {
public:
    PairStream(const MapExpr& m, const SamplerConfig& s, std::string_view op)
        : s_(s), plan_(make_plan(m, s.region)), key_(stream_key(s.seed, op)) {}

    PointPair operator()(std::size_t i) const {
        Xoshiro256 rng = item_rng(key_, i);
        return draw_pair(rng, plan_, s_);
    }

private:
    const SamplerConfig& s_;
    WitnessPlan plan_;
    std::uint64_t key_;
};

void check_map_dim(const MapExpr& m, const SamplerConfig& s) {
    s.validate();
    require_same_dim(m.dim(), s.region.dim(), "sampling region");
}

}  // namespace

// --- Region / SamplerConfig ----------------------------------------------------------------

Region Region::ball(const VectorN& center, double radius, double inner_radius) {
    Region r;
    r.kind = Kind::ball;
    r.center = center;
    r.radius = radius;
    r.inner_radius = inner_radius;
    r.validate();
    return r;
}

Region Region::ball(int dim, double radius, double inner_radius) {
    check_dim(dim, "ball region");
    return ball(VectorN(dim), radius, inner_radius);
}

Region Region::box(int dim, double lo, double hi) {
    check_dim(dim, "box region");
    Region r;
    r.kind = Kind::box;
    r.center = VectorN(dim);
    for (int k = 0; k < dim; ++k) r.center[k] = 0.5 * (lo + hi);
    r.lo = lo;
    r.hi = hi;
    r.validate();
    return r;
}

void Region::validate() const {
    if (center.dim() < 1 || center.dim() > kMaxDim || !center.all_finite()) {
        throw Error(Errc::empty_region, "region has no valid center");
    }
    if (kind == Kind::ball) {
        if (!std::isfinite(radius) || !(radius > 0.0) || !(inner_radius >= 0.0) || !(inner_radius < radius)) {
            throw Error(Errc::empty_region, "ball region needs 0 <= inner radius < radius");
        }
    } else if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw Error(Errc::empty_region, "box region needs lo < hi");
    }
}

bool Region::contains(const VectorN& x) const noexcept {
    if (x.dim() != dim()) return false;
    if (kind == Kind::ball) {
        const double d = distance(x, center);
        return d <= radius && d >= inner_radius;
    }
    for (int k = 0; k < x.dim(); ++k) {
        if (!(x[k] >= lo && x[k] <= hi)) return false;
    }
    return true;
}

VectorN Region::sample(Xoshiro256& rng) const {
    const int n = dim();
    if (kind == Kind::box) {
        VectorN x(n);
        for (int k = 0; k < n; ++k) x[k] = rng.uniform(lo, hi);
        return x;
    }
    const VectorN d = random_direction(rng, n);
    double r;
    if (inner_radius > 0.0) {
        const double a = std::pow(inner_radius, n);
        const double b = std::pow(radius, n);
        r = std::pow(a + rng.uniform() * (b - a), 1.0 / n);
    } else {
        r = radius * std::pow(rng.uniform(), 1.0 / n);
    }
    return center + d * r;
}

double Region::outer_extent() const noexcept {
    if (kind == Kind::ball) return norm(center) + radius;
    return std::sqrt(static_cast<double>(dim())) * std::max(std::abs(lo), std::abs(hi));
}

std::string Region::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind == Kind::box) {
        os << "box:" << lo << ":" << hi;
    } else if (inner_radius > 0.0) {
        os << "annulus:" << inner_radius << ":" << radius;
    } else {
        os << "ball:" << radius;
    }
    return os.str();
}

void SamplerConfig::validate() const {
    region.validate();
    if (n_pairs < 1) throw Error(Errc::invalid_argument, "n_pairs must be at least 1");
    if (!(mix.global >= 0.0) || !(mix.local >= 0.0) || !(mix.witness >= 0.0) ||
        std::abs(mix.global + mix.local + mix.witness - 1.0) > 1e-12) {
        throw Error(Errc::invalid_argument, "sampling mix fractions must be nonnegative and sum to 1");
    }
}

PointPair sample_pair(const MapExpr& m, const SamplerConfig& s, std::string_view op, std::size_t i) {
    check_map_dim(m, s);
    return PairStream(m, s, op)(i);
}

// --- bi-Lipschitz estimation ------------------------------------------------------------------

BilipEstimate bilip_lower_bound(const MapExpr& m, const SamplerConfig& s) {
    check_map_dim(m, s);
    const PairStream pairs(m, s, "bilip_lower_bound");
    const MaxResult r = max_reduce(s.exec, s.n_pairs, [&](std::size_t i) {
        const PointPair p = pairs(i);
        const double d = distance(p.x, p.y);
        if (!(d >= kMinPairDistance)) return kNegInf;
        return bilip_score(distance(m.eval_unchecked(p.x), m.eval_unchecked(p.y)), d);
    });
    if (!r.any()) throw Error(Errc::insufficient_samples, "every sampled pair was degenerate");
    const PointPair p = pairs(r.index);
    BilipEstimate e;
    e.lambda_lower = r.value;
    e.worst = {p.x, p.y, distance(m.eval_unchecked(p.x), m.eval_unchecked(p.y)) / distance(p.x, p.y)};
    e.n_pairs_used = r.used;
    e.seed = s.seed;
    return e;
}

std::optional<PairWitness> falsify_bilip_bound(const MapExpr& m, double lambda_claim, const SamplerConfig& s) {
    if (!(lambda_claim >= 1.0)) throw Error(Errc::invalid_argument, "claimed constant must be >= 1");
    check_map_dim(m, s);
    const PairStream pairs(m, s, "falsify_bilip_bound");
    const MaxResult r = max_reduce(s.exec, s.n_pairs, [&](std::size_t i) {
        const PointPair p = pairs(i);
        return bilip_score(distance(m.eval_unchecked(p.x), m.eval_unchecked(p.y)), distance(p.x, p.y));
    });
    if (!r.any() || !(r.value > lambda_claim * (1.0 + kClaimTolerance))) return std::nullopt;
    const PointPair p = pairs(r.index);
    return PairWitness{p.x, p.y, distance(m.eval_unchecked(p.x), m.eval_unchecked(p.y)) / distance(p.x, p.y)};
}

// --- quasi-isometry ------------------------------------------------------------------------------

double metric_distance(const VectorN& a, const VectorN& b, Metric metric, int l1_split) {
    require_same_dim(a.dim(), b.dim(), "metric_distance");
    const VectorN d = a - b;
    if (metric == Metric::euclidean) return norm(d);
    if (l1_split <= 0 || l1_split >= d.dim()) throw Error(Errc::invalid_argument, "l1 metric split out of range");
    return norm(slice(d, 0, l1_split)) + norm(slice(d, l1_split, d.dim() - l1_split));
}

QiCheck qi_embedding_check(const MapExpr& m, const QiParams& q, const SamplerConfig& s) {
    if (!(q.lambda >= 1.0) || !(q.eps >= 0.0)) throw Error(Errc::invalid_argument, "need lambda >= 1 and eps >= 0");
    check_map_dim(m, s);
    if (q.metric == Metric::l1 && (q.l1_split <= 0 || q.l1_split >= m.dim())) {
        throw Error(Errc::invalid_argument, "l1 metric split out of range");
    }
    const PairStream pairs(m, s, "qi_embedding_check");
    auto margin = [&](const PointPair& p, double* ratio) {
        const double d = metric_distance(p.x, p.y, q.metric, q.l1_split);
        if (!(d >= kMinPairDistance)) return kNegInf;
        const double df = metric_distance(m.eval_unchecked(p.x), m.eval_unchecked(p.y), q.metric, q.l1_split);
        if (ratio) *ratio = df / d;
        const double upper = q.lambda * d + q.eps;
        const double v = std::max(df - upper, (d / q.lambda - q.eps) - df) / upper;
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    std::vector<double> margins(s.n_pairs);
    map_indices(s.exec, margins, [&](std::size_t i) { return margin(pairs(i), nullptr); });
    MaxResult r;
    QiCheck out;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        r.offer(margins[i], i);
        if (margins[i] > kClaimTolerance) ++out.violations;
    }
    if (!r.any()) throw Error(Errc::insufficient_samples, "every sampled pair was degenerate");
    const PointPair p = pairs(r.index);
    double ratio = 1.0;
    margin(p, &ratio);
    out.worst = {p.x, p.y, ratio};
    out.worst_margin = r.value;
    out.n_pairs_used = r.used;
    out.pass = out.violations == 0;
    return out;
}

// --- C-density -----------------------------------------------------------------------------------

DensityResult c_density(const MapExpr& m, const Region& region, double grid_step, double margin, Exec exec) {
    region.validate();
    require_same_dim(m.dim(), region.dim(), "c_density region");
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) throw Error(Errc::invalid_argument, "grid step must be > 0");
    if (!(margin >= 0.0)) throw Error(Errc::invalid_argument, "margin must be >= 0");
    const int n = region.dim();
    VectorN lo(n), hi(n);
    for (int k = 0; k < n; ++k) {
        if (region.kind == Region::Kind::box) {
            lo[k] = region.lo;
            hi[k] = region.hi;
        } else {
            lo[k] = region.center[k] - region.radius;
            hi[k] = region.center[k] + region.radius;
        }
    }
    const auto cells = static_cast<long long>(std::ceil((hi[0] - lo[0]) / grid_step - 1e-9));
    const auto verts = static_cast<long long>(std::ceil((hi[0] - lo[0] + 2.0 * margin) / grid_step - 1e-9)) + 1;
    if (std::pow(static_cast<double>(verts), n) > 2e7) {
        throw Error(Errc::invalid_argument, "density lattice above 2e7 points; increase the grid step");
    }
    auto lattice = [&](long long per_axis, auto&& coord) {
        std::vector<VectorN> pts;
        std::vector<long long> idx(static_cast<std::size_t>(n), 0);
        while (true) {
            VectorN p(n);
            for (int k = 0; k < n; ++k) p[k] = coord(k, idx[static_cast<std::size_t>(k)]);
            pts.push_back(p);
            int k = 0;
            while (k < n && ++idx[static_cast<std::size_t>(k)] == per_axis) idx[static_cast<std::size_t>(k++)] = 0;
            if (k == n) break;
        }
        return pts;
    };
    std::vector<VectorN> targets;
    for (const VectorN& c : lattice(cells, [&](int k, long long i) {
             return lo[k] + (static_cast<double>(i) + 0.5) * grid_step;
         })) {
        if (region.contains(c)) targets.push_back(c);
    }
    if (targets.empty()) throw Error(Errc::empty_region, "no grid cell centers inside the region");
    const std::vector<VectorN> domain =
        lattice(verts, [&](int k, long long i) { return lo[k] - margin + static_cast<double>(i) * grid_step; });
    std::vector<VectorN> images(domain.size());
    map_indices(exec, images, [&](std::size_t i) { return m.eval(domain[i]); });
    const std::vector<double> d =
        exec == Exec::serial ? nearest_distances_serial(images, targets) : nearest_distances_parallel(images, targets);
    MaxResult r;
    for (std::size_t i = 0; i < d.size(); ++i) r.offer(d[i], i);
    DensityResult out;
    out.c = r.value;
    out.worst_target = targets[r.index];
    out.n_targets = targets.size();
    out.n_domain = domain.size();
    return out;
}

// --- drift -----------------------------------------------------------------------------------------

DriftReport drift_profile(const MapExpr& m, const std::vector<VectorN>& witnesses, double threshold) {
    if (witnesses.empty()) throw Error(Errc::invalid_argument, "drift profile needs at least one witness");
    DriftReport rep;
    rep.witnesses = witnesses;
    rep.threshold = threshold;
    rep.drifts.reserve(witnesses.size());
    for (const VectorN& x : witnesses) rep.drifts.push_back(norm(m.displacement(x)));
    const std::size_t k = rep.drifts.size();
    const std::size_t tail = std::min<std::size_t>(5, k);
    bool growing = true;
    for (std::size_t i = k - tail + 1; i < k; ++i) growing = growing && rep.drifts[i] > rep.drifts[i - 1];
    rep.verdict = (rep.drifts.back() > threshold && growing) ? DriftVerdict::exceeds : DriftVerdict::bounded;
    return rep;
}

std::vector<VectorN> psi_drift_witnesses(const DiskMap& g, const VectorN& x0, int K) {
    require_same_dim(x0.dim(), g.dim(), "psi_drift_witnesses");
    if (K < 1 || K > 500) throw Error(Errc::invalid_argument, "K must lie in [1, 500]");
    if (!x0.all_finite() || !(norm(x0) < 1.0)) throw Error(Errc::invalid_point, "x0 must lie in the open unit disk");
    if (norm(g.displacement(x0)) == 0.0) throw Error(Errc::trivial_witness, "x0 is fixed by g");
    std::vector<VectorN> out;
    out.reserve(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) out.push_back(replication_rho(k, x0));
    return out;
}

namespace {

// Unit top eigenvector of the symmetric positive semidefinite matrix s.
VectorN top_eigenvector(const MatrixN& s) {
    const int n = s.dim();
    VectorN best(n);
    double best_val = -1.0;
    // Start from e_1 + ... + e_n and every axis so no start is orthogonal to the top space.
    for (int start = -1; start < n; ++start) {
        VectorN v = start < 0 ? VectorN(n) : VectorN::unit(n, start);
        if (start < 0) {
            for (int k = 0; k < n; ++k) v[k] = 1.0 / std::sqrt(static_cast<double>(n));
        }
        for (int it = 0; it < 500; ++it) {
            VectorN w = s * v;
            const double wn = norm(w);
            if (!(wn > 0.0)) break;
            v = w / wn;
        }
        const double val = dot(v, s * v);
        if (val > best_val * (1.0 + 1e-12)) {
            best_val = val;
            best = v;
        }
    }
    return best;
}

}  // namespace

std::vector<VectorN> spiral_drift_witnesses(const SpiralProfile& p, int K) {
    if (K < 1 || K > 500) throw Error(Errc::invalid_argument, "K must lie in [1, 500]");
    const int n = p.dim();
    const MatrixN id = MatrixN::identity(n);
    constexpr int kScan = 16;
    std::vector<VectorN> out;
    std::vector<double> angles;
    for (int k = 1; k <= K; ++k) {
        const double base = std::ldexp(1.0, k);
        double best_t = base;
        double best_gap = -1.0;
        for (int s = 0; s < kScan; ++s) {
            const double t = base * std::exp2(static_cast<double>(s) / kScan);
            const double gap = operator_norm(p.at(t) - id);
            if (gap > best_gap) {
                best_gap = gap;
                best_t = t;
            }
        }
        const MatrixN a = p.at(best_t);
        const VectorN u = top_eigenvector(id * 2.0 - a - a.transpose());
        const double chord = norm(a * u - u);
        angles.push_back(2.0 * std::asin(std::min(1.0, chord / 2.0)));
        out.push_back(u * best_t);
    }
    const std::size_t tail = std::min<std::size_t>(5, angles.size());
    if (std::all_of(angles.end() - static_cast<std::ptrdiff_t>(tail), angles.end(),
                    [](double a) { return a < 1e-6; })) {
        throw Error(Errc::no_witness, "profile is indistinguishable from the identity at large radii");
    }
    return out;
}

std::vector<VectorN> ray_witnesses(const VectorN& x, int K) {
    if (K < 1 || K > 500) throw Error(Errc::invalid_argument, "K must lie in [1, 500]");
    std::vector<VectorN> out;
    for (int k = 1; k <= K; ++k) out.push_back(x * std::ldexp(1.0, k));
    return out;
}

// --- sphere maps -------------------------------------------------------------------------------------

namespace {

void collect_latitude_axes(const SphereMap& phi, std::vector<VectorN>& axes) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, SphereMap::Latitude>) {
                axes.push_back(n.axis);
            } else if constexpr (std::is_same_v<T, SphereMap::Conjugated>) {
                std::vector<VectorN> inner;
                collect_latitude_axes(n.inner, inner);
                for (const VectorN& a : inner) {
                    axes.push_back(n.r * a);
                    axes.push_back(n.r.transpose() * a);
                }
            } else if constexpr (std::is_same_v<T, SphereMap::Composed>) {
                for (const SphereMap& p : n.parts) collect_latitude_axes(p, axes);
            } else if constexpr (std::is_same_v<T, SphereMap::Inverted>) {
                collect_latitude_axes(n.inner, axes);
            }
        },
        phi.node().v);
}

}  // namespace

BilipEstimate sphere_bilip_lower_bound(const SphereMap& phi, std::uint64_t seed, std::size_t n_pairs, Exec exec) {
    if (n_pairs < 1) throw Error(Errc::invalid_argument, "n_pairs must be at least 1");
    const int n = phi.dim();
    std::vector<VectorN> poles;
    collect_latitude_axes(phi, poles);
    for (std::size_t i = 0, m = poles.size(); i < m; ++i) poles.push_back(-poles[i]);
    const std::uint64_t key = stream_key(seed, "sphere_bilip_lower_bound");
    auto pair = [&](std::size_t i) -> PointPair {
        Xoshiro256 rng = item_rng(key, i);
        const double u = rng.uniform();
        const VectorN x = (u >= 0.8 && !poles.empty())
                              ? [&] {
                                    const VectorN& pole = poles[rng.below(poles.size())];
                                    return sphere_neighbour(rng, pole, log_uniform(rng, 1e-6, 0.3));
                                }()
                              : random_direction(rng, n);
        if (u < 0.4) return {x, random_direction(rng, n)};
        return {x, sphere_neighbour(rng, x, log_uniform(rng, 1e-7, 0.5))};
    };
    const MaxResult r = max_reduce(exec, n_pairs, [&](std::size_t i) {
        const PointPair p = pair(i);
        return bilip_score(distance(phi.eval(p.x), phi.eval(p.y)), distance(p.x, p.y));
    });
    if (!r.any()) throw Error(Errc::insufficient_samples, "every sampled pair was degenerate");
    const PointPair p = pair(r.index);
    BilipEstimate e;
    e.lambda_lower = r.value;
    e.worst = {p.x, p.y, distance(phi.eval(p.x), phi.eval(p.y)) / distance(p.x, p.y)};
    e.n_pairs_used = r.used;
    e.seed = seed;
    return e;
}

// --- epsilon graphs ----------------------------------------------------------------------------------

EpsGraph::EpsGraph(std::vector<VectorN> cloud, double eps) : cloud_(std::move(cloud)), eps_(eps) {
    if (cloud_.empty()) throw Error(Errc::invalid_argument, "empty point cloud");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(Errc::invalid_argument, "graph radius must be > 0");
    if (cloud_.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(Errc::invalid_argument, "point cloud too large");
    }
    const int n = cloud_.front().dim();
    for (const VectorN& p : cloud_) {
        require_same_dim(p.dim(), n, "point cloud");
        if (!p.all_finite()) throw Error(Errc::invalid_point, "point cloud contains a non-finite point");
    }
    const double eps2 = eps * eps;
    std::vector<std::vector<std::uint32_t>> adj(cloud_.size());
    auto add_if_close = [&](std::size_t i, std::size_t j) {
        const VectorN d = cloud_[i] - cloud_[j];
        if (dot(d, d) <= eps2) adj[i].push_back(static_cast<std::uint32_t>(j));
    };
    if (n <= 6) {
        // Bucket grid with cell size eps; neighbours lie in the 3^n adjacent cells.
        using Cell = std::array<long long, 6>;
        auto cell_of = [&](const VectorN& p) {
            Cell c{};
            for (int k = 0; k < n; ++k) c[static_cast<std::size_t>(k)] = static_cast<long long>(std::floor(p[k] / eps));
            return c;
        };
        auto key = [&](const Cell& c) {
            std::uint64_t h = 0xCBF29CE484222325ULL;
            for (int k = 0; k < n; ++k) {
                h ^= static_cast<std::uint64_t>(c[static_cast<std::size_t>(k)]);
                h *= 0x100000001B3ULL;
                h ^= h >> 29;
            }
            return h;
        };
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
        for (std::size_t i = 0; i < cloud_.size(); ++i) buckets[key(cell_of(cloud_[i]))].push_back(static_cast<std::uint32_t>(i));
        int neighbours = 1;
        for (int k = 0; k < n; ++k) neighbours *= 3;
        for (std::size_t i = 0; i < cloud_.size(); ++i) {
            const Cell c = cell_of(cloud_[i]);
            std::vector<std::uint64_t> seen;
            for (int code = 0; code < neighbours; ++code) {
                Cell nc = c;
                int rest = code;
                for (int k = 0; k < n; ++k) {
                    nc[static_cast<std::size_t>(k)] += rest % 3 - 1;
                    rest /= 3;
                }
                const std::uint64_t kk = key(nc);
                // Distinct cells may share a hash; visit each bucket once.
                if (std::find(seen.begin(), seen.end(), kk) != seen.end()) continue;
                seen.push_back(kk);
                const auto it = buckets.find(kk);
                if (it == buckets.end()) continue;
                for (std::uint32_t j : it->second) {
                    if (j != i) add_if_close(i, j);
                }
            }
        }
    } else {
        for (std::size_t i = 0; i < cloud_.size(); ++i) {
            for (std::size_t j = 0; j < cloud_.size(); ++j) {
                if (j != i) add_if_close(i, j);
            }
        }
    }
    offsets_.assign(cloud_.size() + 1, 0);
    for (std::size_t i = 0; i < cloud_.size(); ++i) {
        std::sort(adj[i].begin(), adj[i].end());
        offsets_[i + 1] = offsets_[i] + adj[i].size();
    }
    targets_.reserve(offsets_.back());
    weights_.reserve(offsets_.back());
    for (std::size_t i = 0; i < cloud_.size(); ++i) {
        for (std::uint32_t j : adj[i]) {
            targets_.push_back(j);
            weights_.push_back(distance(cloud_[i], cloud_[j]));
        }
    }
    // Connectivity by breadth-first search from point 0.
    std::vector<char> seen(cloud_.size(), 0);
    std::vector<std::uint32_t> queue{0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::uint32_t u = queue[head];
        for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e) {
            if (!seen[targets_[e]]) {
                seen[targets_[e]] = 1;
                queue.push_back(targets_[e]);
            }
        }
    }
    if (queue.size() != cloud_.size()) {
        throw Error(Errc::disconnected_cloud, "epsilon graph has " + std::to_string(cloud_.size() - queue.size()) +
                                                  " points unreachable from point 0; increase eps");
    }
}

std::vector<double> EpsGraph::distances_from(std::size_t source) const {
    if (source >= cloud_.size()) throw Error(Errc::invalid_argument, "source index out of range");
    std::vector<double> dist(cloud_.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, static_cast<std::uint32_t>(source));
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e) {
            const double nd = d + weights_[e];
            if (nd < dist[targets_[e]]) {
                dist[targets_[e]] = nd;
                heap.emplace(nd, targets_[e]);
            }
        }
    }
    return dist;
}

double geodesic_estimate(const EpsGraph& g, std::size_t i, std::size_t j) {
    if (j >= g.size()) throw Error(Errc::invalid_argument, "point index out of range");
    return g.distances_from(i)[j];
}

MetricRatio metric_equivalence_ratio(const EpsGraph& g, std::size_t n_sources, std::uint64_t seed, Exec exec) {
    if (n_sources < 1) throw Error(Errc::invalid_argument, "need at least one source");
    const std::uint64_t key = stream_key(seed, "metric_equivalence_ratio");
    struct PerSource {
        double ratio = kNegInf;
        std::size_t j = 0;
        std::size_t pairs = 0;
        std::size_t violations = 0;
    };
    std::vector<std::size_t> sources(n_sources);
    for (std::size_t s = 0; s < n_sources; ++s) sources[s] = item_rng(key, s).below(g.size());
    std::vector<PerSource> per(n_sources);
    map_indices(exec, per, [&](std::size_t s) {
        const std::size_t i = sources[s];
        const std::vector<double> dist = g.distances_from(i);
        PerSource r;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double chord = distance(g.cloud()[i], g.cloud()[j]);
            if (!(chord >= kMinPairDistance)) continue;
            ++r.pairs;
            if (dist[j] < chord * (1.0 - 1e-12)) ++r.violations;
            const double ratio = dist[j] / chord;
            if (ratio > r.ratio) {
                r.ratio = ratio;
                r.j = j;
            }
        }
        return r;
    });
    MaxResult best;
    MetricRatio out;
    for (std::size_t s = 0; s < n_sources; ++s) {
        best.offer(per[s].ratio, s);
        out.n_pairs += per[s].pairs;
        out.chord_violations += per[s].violations;
    }
    if (!best.any()) throw Error(Errc::insufficient_samples, "all sampled pairs coincide");
    out.ratio = best.value;
    out.i = sources[best.index];
    out.j = per[best.index].j;
    out.chord = distance(g.cloud()[out.i], g.cloud()[out.j]);
    out.geodesic = out.ratio * out.chord;
    out.n_sources = n_sources;
    return out;
}

// --- clouds --------------------------------------------------------------------------------------------

std::vector<VectorN> circle_cloud(std::size_t n_points) { return ellipse_cloud(1.0, 1.0, n_points); }

std::vector<VectorN> ellipse_cloud(double a, double b, std::size_t n_points) {
    if (n_points < 3 || !(a > 0.0) || !(b > 0.0)) throw Error(Errc::invalid_argument, "ellipse cloud parameters");
    std::vector<VectorN> out;
    out.reserve(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_points);
        out.push_back(VectorN{a * std::cos(t), b * std::sin(t)});
    }
    return out;
}

std::vector<VectorN> sphere_cloud(std::size_t n_points) {
    if (n_points < 4) throw Error(Errc::invalid_argument, "sphere cloud needs at least 4 points");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<VectorN> out;
    out.reserve(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n_points);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(k);
        out.push_back(VectorN{r * std::cos(phi), r * std::sin(phi), z});
    }
    return out;
}

std::vector<VectorN> read_cloud_csv(std::istream& in) {
    std::vector<VectorN> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (out.empty() && std::isalpha(static_cast<unsigned char>(line[line.find_first_not_of(" \t")]))) continue;
        std::vector<double> coords;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                coords.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error(Errc::parse_error, "cloud line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
        }
        if (coords.empty() || coords.size() > static_cast<std::size_t>(kMaxDim)) {
            throw Error(Errc::parse_error, "cloud line " + std::to_string(line_no) + ": bad coordinate count");
        }
        if (!out.empty() && static_cast<int>(coords.size()) != out.front().dim()) {
            throw Error(Errc::parse_error, "cloud line " + std::to_string(line_no) + ": dimension changes");
        }
        out.push_back(VectorN::from(coords));
    }
    if (out.empty()) throw Error(Errc::parse_error, "cloud file has no points");
    return out;
}

void write_cloud_csv(std::ostream& out, const std::vector<VectorN>& cloud) {
    char buf[32];
    for (const VectorN& p : cloud) {
        for (int k = 0; k < p.dim(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", p[k]);
            out << (k ? "," : "") << buf;
        }
        out << '\n';
    }
}

}  // namespace qimaps
