#include "qimaps/maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qimaps {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_plane(int i, int j, int dim) {
    if (i < 0 || j < 0 || i >= dim || j >= dim || i >= j) {
        throw Error(Errc::invalid_plane, "rotation plane (" + std::to_string(i) + "," + std::to_string(j) +
                                             ") invalid for dimension " + std::to_string(dim));
    }
}

double orthogonality_defect(const MatrixN& r) {
    return frobenius_norm(r.transpose() * r - MatrixN::identity(r.dim()));
}

constexpr double kSphereTol = 1e-9;

VectorN to_sphere(const VectorN& x, const char* what) {
    const double n = norm(x);
    if (!(std::abs(n - 1.0) <= kSphereTol)) {
        throw Error(Errc::off_sphere, std::string(what) + ": |x| = " + std::to_string(n));
    }
    return x / n;
}

}  // namespace

// --- SphereMap -----------------------------------------------------------------------

SphereMap::SphereMap(std::shared_ptr<const Node> node, int dim, std::optional<double> lambda)
    : node_(std::move(node)), dim_(dim), lambda_(lambda) {}

SphereMap SphereMap::identity(int dim) { return orthogonal(MatrixN::identity(dim)); }

SphereMap SphereMap::orthogonal(const MatrixN& r) {
    if (!r.all_finite() || orthogonality_defect(r) > 1e-9) {
        throw Error(Errc::invalid_matrix, "sphere map matrix is not orthogonal");
    }
    return SphereMap(std::make_shared<const Node>(Node{Orthogonal{r}}), r.dim(), 1.0);
}

double latitude_geodesic_claim(double beta) {
    const double b = std::abs(beta);
    return std::max(1.0 + b, 1.0 / (1.0 - b));
}

SphereMap SphereMap::latitude(double beta, const VectorN& axis) {
    if (!std::isfinite(beta) || std::abs(beta) > 0.9) {
        throw Error(Errc::monotonicity, "latitude map needs |beta| <= 0.9");
    }
    if (axis.dim() < 2) throw Error(Errc::dim_mismatch, "latitude map needs dimension >= 2");
    const double n = norm(axis);
    if (!axis.all_finite() || !(n > 0.0)) throw Error(Errc::invalid_argument, "latitude axis must be nonzero");
    // Chordal claim: geodesic claim times the pi/2 equivalence factor of the two metrics.
    const double lambda = std::numbers::pi / 2.0 * latitude_geodesic_claim(beta);
    // Axes already unit to rounding are kept verbatim so the text form round-trips.
    const VectorN unit = std::abs(n - 1.0) <= 4e-16 ? axis : axis / n;
    return SphereMap(std::make_shared<const Node>(Node{Latitude{beta, unit}}), axis.dim(), lambda);
}

SphereMap make_latitude_sphere_map(double beta, const VectorN& axis) { return SphereMap::latitude(beta, axis); }

SphereMap SphereMap::conjugated(const MatrixN& r, const SphereMap& inner) {
    require_same_dim(r.dim(), inner.dim(), "conjugated sphere map");
    if (!r.all_finite() || orthogonality_defect(r) > 1e-9) {
        throw Error(Errc::invalid_matrix, "conjugating matrix is not orthogonal");
    }
    return SphereMap(std::make_shared<const Node>(Node{Conjugated{r, inner}}), r.dim(), inner.lambda_);
}

SphereMap SphereMap::composed(std::vector<SphereMap> parts, int dim) {
    check_dim(dim, "composed sphere map");
    std::optional<double> lambda = 1.0;
    for (const SphereMap& p : parts) {
        require_same_dim(p.dim(), dim, "composed sphere map");
        lambda = (lambda && p.lambda_) ? std::optional<double>(*lambda * *p.lambda_) : std::nullopt;
    }
    return SphereMap(std::make_shared<const Node>(Node{Composed{std::move(parts)}}), dim, lambda);
}

SphereMap SphereMap::inverse() const {
    if (const auto* o = std::get_if<Orthogonal>(&node_->v)) return orthogonal(o->r.transpose());
    if (const auto* inv = std::get_if<Inverted>(&node_->v)) return inv->inner;
    return SphereMap(std::make_shared<const Node>(Node{Inverted{*this}}), dim_, lambda_);
}

namespace {

VectorN latitude_apply(double beta, const VectorN& axis, const VectorN& u, bool inverse) {
    const double c = dot(u, axis);
    VectorN p = u - axis * c;
    const double s = norm(p);
    if (s == 0.0) return u;  // poles are fixed
    const double alpha = std::atan2(s, c);
    double target;
    if (!inverse) {
        target = alpha + beta * std::sin(alpha);
    } else {
        // Solve a + beta sin(a) = alpha on [0, pi]; the left side is strictly
        // increasing because |beta| <= 0.9.
        double lo = 0.0;
        double hi = std::numbers::pi;
        double a = alpha;
        for (int it = 0; it < 200; ++it) {
            const double h = a + beta * std::sin(a) - alpha;
            if (h == 0.0) break;
            if (h > 0.0) {
                hi = a;
            } else {
                lo = a;
            }
            const double next = a - h / (1.0 + beta * std::cos(a));
            const double prev = a;
            a = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
            if (a == prev) break;
        }
        target = a;
    }
    return axis * std::cos(target) + p * (std::sin(target) / s);
}

}  // namespace

VectorN SphereMap::apply(const VectorN& u) const {
    return std::visit(overloaded{
                          [&](const Orthogonal& o) { return o.r * u; },
                          [&](const Latitude& l) { return latitude_apply(l.beta, l.axis, u, false); },
                          [&](const Conjugated& c) { return c.r * c.inner.apply(c.r.transpose() * u); },
                          [&](const Composed& c) {
                              VectorN z = u;
                              for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) z = it->apply(z);
                              return z;
                          },
                          [&](const Inverted& i) { return i.inner.apply_inverse(u); },
                      },
                      node_->v);
}

VectorN SphereMap::apply_inverse(const VectorN& u) const {
    return std::visit(overloaded{
                          [&](const Orthogonal& o) { return o.r.transpose() * u; },
                          [&](const Latitude& l) { return latitude_apply(l.beta, l.axis, u, true); },
                          [&](const Conjugated& c) { return c.r * c.inner.apply_inverse(c.r.transpose() * u); },
                          [&](const Composed& c) {
                              VectorN z = u;
                              for (const SphereMap& p : c.parts) z = p.apply_inverse(z);
                              return z;
                          },
                          [&](const Inverted& i) { return i.inner.apply(u); },
                      },
                      node_->v);
}

VectorN SphereMap::eval(const VectorN& x) const {
    require_same_dim(x.dim(), dim_, "SphereMap::eval");
    if (!x.all_finite()) throw Error(Errc::invalid_point, "SphereMap::eval: non-finite point");
    return to_sphere(apply(to_sphere(x, "SphereMap::eval input")), "SphereMap::eval output");
}

VectorN SphereMap::eval_inverse(const VectorN& x) const {
    require_same_dim(x.dim(), dim_, "SphereMap::eval_inverse");
    if (!x.all_finite()) throw Error(Errc::invalid_point, "SphereMap::eval_inverse: non-finite point");
    return to_sphere(apply_inverse(to_sphere(x, "SphereMap::eval_inverse input")), "SphereMap::eval_inverse output");
}

// --- DiskMap -----------------------------------------------------------------------------

DiskMap::DiskMap(std::shared_ptr<const Node> node, int dim, std::optional<double> lambda)
    : node_(std::move(node)), dim_(dim), lambda_(lambda) {}

double twist_bilip_constant(double s) noexcept { return 0.5 * (s + std::sqrt(s * s + 4.0)); }

DiskMap DiskMap::identity(int dim) { return composed({}, dim); }

DiskMap DiskMap::twist(const AngleProfile& theta, int i, int j, int dim) {
    check_dim(dim, "twist disk map");
    check_plane(i, j, dim);
    if (theta.knots().empty()) throw Error(Errc::invalid_argument, "twist needs an angle profile");
    if (theta.end() > 1.0) throw Error(Errc::support_violation, "twist angle profile must vanish for r >= 1");
    const double lambda = twist_bilip_constant(theta.sup_abs_r_derivative());
    return DiskMap(std::make_shared<const Node>(Node{Twist{theta, i, j}}), dim, lambda);
}

DiskMap make_twist_disk_map(const AngleProfile& theta, int i, int j, int dim) {
    return DiskMap::twist(theta, i, j, dim);
}

DiskMap DiskMap::pl(const PLMap& map) {
    if (!map.boundary_fixed()) throw Error(Errc::support_violation, "PL disk map must fix its boundary");
    const PLValidation v = pl_validate(map);
    if (!v.boundary_violations.empty()) throw Error(Errc::support_violation, "PL disk map moves boundary vertices");
    const double lambda = pl_bilip_constant(map);
    const Triangulation& tri = map.triangulation();
    const double half = 0.5 * (tri.hi() - tri.lo());
    const double scale = 1.0 / (half * std::sqrt(static_cast<double>(tri.dim())));
    const double center = 0.5 * (tri.hi() + tri.lo());
    return DiskMap(std::make_shared<const Node>(Node{Pl{map, scale, center}}), tri.dim(), lambda);
}

DiskMap DiskMap::composed(std::vector<DiskMap> parts, int dim) {
    check_dim(dim, "composed disk map");
    std::optional<double> lambda = 1.0;
    for (const DiskMap& p : parts) {
        require_same_dim(p.dim(), dim, "composed disk map");
        lambda = (lambda && p.lambda_) ? std::optional<double>(*lambda * *p.lambda_) : std::nullopt;
    }
    return DiskMap(std::make_shared<const Node>(Node{Composed{std::move(parts)}}), dim, lambda);
}

bool DiskMap::is_identity() const noexcept {
    return std::visit(overloaded{
                          [](const Twist& t) { return t.theta.is_zero(); },
                          [](const Pl&) { return false; },
                          [](const Composed& c) {
                              return std::all_of(c.parts.begin(), c.parts.end(),
                                                 [](const DiskMap& d) { return d.is_identity(); });
                          },
                          [](const Inverted& i) { return i.inner.is_identity(); },
                      },
                      node_->v);
}

DiskMap DiskMap::inverse() const {
    if (const auto* t = std::get_if<Twist>(&node_->v)) return twist(t->theta.negated(), t->i, t->j, dim_);
    if (const auto* inv = std::get_if<Inverted>(&node_->v)) return inv->inner;
    return DiskMap(std::make_shared<const Node>(Node{Inverted{*this}}), dim_, lambda_);
}

VectorN DiskMap::eval(const VectorN& x) const {
    if (!(norm(x) < 1.0)) return x;
    return std::visit(overloaded{
                          [&](const Twist& t) { return rotate_in_plane(x, t.i, t.j, t.theta(norm(x))); },
                          [&](const Pl& p) {
                              VectorN y(dim_);
                              for (int k = 0; k < dim_; ++k) y[k] = x[k] / p.scale + p.center;
                              if (!p.map.triangulation().contains(y)) return x;
                              VectorN z = p.map.eval(y);
                              for (int k = 0; k < dim_; ++k) z[k] = (z[k] - p.center) * p.scale;
                              return z;
                          },
                          [&](const Composed& c) {
                              VectorN z = x;
                              for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) z = it->eval(z);
                              return z;
                          },
                          [&](const Inverted& i) { return i.inner.eval_inverse(x); },
                      },
                      node_->v);
}

VectorN DiskMap::eval_inverse(const VectorN& x) const {
    if (!(norm(x) < 1.0)) return x;
    return std::visit(overloaded{
                          [&](const Twist& t) { return rotate_in_plane(x, t.i, t.j, -t.theta(norm(x))); },
                          [&](const Pl& p) {
                              VectorN y(dim_);
                              for (int k = 0; k < dim_; ++k) y[k] = x[k] / p.scale + p.center;
                              if (!p.map.triangulation().contains(y)) return x;
                              VectorN z = p.map.eval_inverse(y);
                              for (int k = 0; k < dim_; ++k) z[k] = (z[k] - p.center) * p.scale;
                              return z;
                          },
                          [&](const Composed& c) {
                              VectorN z = x;
                              for (const DiskMap& d : c.parts) z = d.eval_inverse(z);
                              return z;
                          },
                          [&](const Inverted& i) { return i.inner.eval(x); },
                      },
                      node_->v);
}

// --- SpiralProfile -------------------------------------------------------------------------

SpiralProfile SpiralProfile::constant(const MatrixN& a) {
    if (!a.all_finite() || orthogonality_defect(a) > 1e-9 || !(determinant(a) > 0.0)) {
        throw Error(Errc::invalid_matrix, "constant spiral profile must lie in SO(n)");
    }
    return SpiralProfile(Constant{a}, a.dim(), 0.0);
}

SpiralProfile SpiralProfile::log_spiral(double c, int i, int j, int dim) {
    check_dim(dim, "log spiral");
    check_plane(i, j, dim);
    if (!std::isfinite(c)) throw Error(Errc::invalid_argument, "log spiral rate not finite");
    return SpiralProfile(LogSpiral{c, i, j}, dim, std::abs(c));
}

SpiralProfile SpiralProfile::cutoff(const AngleProfile& theta, int i, int j, int dim) {
    check_dim(dim, "cutoff spiral");
    check_plane(i, j, dim);
    if (theta.knots().empty()) throw Error(Errc::invalid_argument, "cutoff spiral needs an angle profile");
    // |d/dt cos(theta(t))|, |d/dt sin(theta(t))| <= |theta'(t)|.
    return SpiralProfile(Cutoff{theta, i, j}, dim, theta.sup_abs_r_derivative());
}

MatrixN SpiralProfile::at(double t) const {
    return std::visit(overloaded{
                          [&](const Constant& c) { return c.a; },
                          [&](const LogSpiral& l) { return rotation_matrix(l.i, l.j, l.c * std::log(t), dim_); },
                          [&](const Cutoff& c) { return rotation_matrix(c.i, c.j, c.theta(t), dim_); },
                      },
                      node_);
}

VectorN SpiralProfile::apply(double t, const VectorN& x) const {
    return std::visit(overloaded{
                          [&](const Constant& c) { return c.a * x; },
                          [&](const LogSpiral& l) { return rotate_in_plane(x, l.i, l.j, l.c * std::log(t)); },
                          [&](const Cutoff& c) { return rotate_in_plane(x, c.i, c.j, c.theta(t)); },
                      },
                      node_);
}

VectorN SpiralProfile::apply_inverse(double t, const VectorN& x) const {
    return std::visit(overloaded{
                          [&](const Constant& c) { return c.a.transpose() * x; },
                          [&](const LogSpiral& l) { return rotate_in_plane(x, l.i, l.j, -l.c * std::log(t)); },
                          [&](const Cutoff& c) { return rotate_in_plane(x, c.i, c.j, -c.theta(t)); },
                      },
                      node_);
}

// --- replication disks ------------------------------------------------------------------------

double replication_radius(int j) noexcept { return std::ldexp(1.0, j); }

VectorN replication_center(int j, int dim) {
    VectorN c(dim);
    if (j > 0) c[0] = std::ldexp(1.0, 2 * j);
    return c;
}

VectorN replication_rho(int j, const VectorN& v) {
    VectorN out = v * replication_radius(j);
    if (j > 0) out[0] += std::ldexp(1.0, 2 * j);
    return out;
}

namespace {

// Squared distance from v to c_j without forming the center vector.
double dist2_to_center(const VectorN& v, int j) {
    const double c0 = j > 0 ? std::ldexp(1.0, 2 * j) : 0.0;
    double s = (v[0] - c0) * (v[0] - c0);
    for (int i = 1; i < v.dim(); ++i) s += v[i] * v[i];
    return s;
}

// rho_j^{-1}(v) = (v - c_j) / 2^j; exact when v - c_j is representable.
VectorN rho_inverse(int j, const VectorN& v) {
    VectorN x = v;
    if (j > 0) x[0] -= std::ldexp(1.0, 2 * j);
    return x * std::ldexp(1.0, -j);
}

std::optional<long long> locate_translated(const VectorN& v, const MapExpr::PhiTranslated& p) {
    const double k = std::round(v[0] / 2.0);
    if (!(k >= 0.0)) return std::nullopt;
    if (!p.uniform && k >= static_cast<double>(p.gs.size())) return std::nullopt;
    double s = (v[0] - 2.0 * k) * (v[0] - 2.0 * k);
    for (int i = 1; i < v.dim(); ++i) s += v[i] * v[i];
    if (!(s <= 1.0)) return std::nullopt;
    return static_cast<long long>(k);
}

const DiskMap& translated_factor(const MapExpr::PhiTranslated& p, long long j) {
    return p.uniform ? p.gs.front() : p.gs[static_cast<std::size_t>(j)];
}

VectorN translate_e1(VectorN v, double shift) {
    v[0] += shift;
    return v;
}

}  // namespace

std::optional<int> locate_replication_disk(const VectorN& v) {
    if (!v.all_finite()) return std::nullopt;
    const double r = norm(v);
    const int jmax = std::min(500, static_cast<int>(std::ceil(std::log(r + 2.0) / std::log(4.0))) + 1);
    for (int j = 0; j <= jmax; ++j) {
        const double rad = replication_radius(j);
        if (dist2_to_center(v, j) <= rad * rad) return j;
    }
    return std::nullopt;
}

// --- MapExpr ---------------------------------------------------------------------------------

MapExpr::MapExpr(std::shared_ptr<const Node> node, int dim, std::optional<double> lambda)
    : node_(std::move(node)), dim_(dim), lambda_(lambda) {}

MapExpr make_map(MapExpr::Node node, int dim, std::optional<double> lambda) {
    check_dim(dim, "map expression");
    return MapExpr(std::make_shared<const MapExpr::Node>(std::move(node)), dim, lambda);
}

MapExpr MapExpr::identity(int dim) { return make_map(Node{Identity{}}, dim, 1.0); }

MapExpr MapExpr::affine(const MatrixN& m, const VectorN& b) {
    require_same_dim(m.dim(), b.dim(), "affine map");
    if (!m.all_finite() || !b.all_finite()) throw Error(Errc::invalid_matrix, "affine map not finite");
    std::optional<MatrixN> inv;
    std::optional<double> lambda;
    const double smin = min_singular_value(m);
    if (smin > 0.0) {
        try {
            inv = inverse(m);
            lambda = std::max(operator_norm(m), 1.0 / smin);
        } catch (const Error&) {
            inv.reset();
        }
    }
    return make_map(Node{Affine{m, b, inv}}, m.dim(), lambda);
}

VectorN MapExpr::eval(const VectorN& v) const {
    require_same_dim(v.dim(), dim_, "MapExpr::eval");
    if (!v.all_finite()) throw Error(Errc::invalid_point, "MapExpr::eval: non-finite point");
    return eval_unchecked(v);
}

VectorN MapExpr::eval_inverse(const VectorN& v) const {
    require_same_dim(v.dim(), dim_, "MapExpr::eval_inverse");
    if (!v.all_finite()) throw Error(Errc::invalid_point, "MapExpr::eval_inverse: non-finite point");
    return eval_inverse_unchecked(v);
}

VectorN MapExpr::displacement(const VectorN& v) const {
    require_same_dim(v.dim(), dim_, "MapExpr::displacement");
    if (!v.all_finite()) throw Error(Errc::invalid_point, "MapExpr::displacement: non-finite point");
    return displacement_unchecked(v);
}

VectorN MapExpr::eval_unchecked(const VectorN& v) const {
    return std::visit(
        overloaded{
            [&](const Identity&) { return v; },
            [&](const Affine& a) { return a.m * v + a.b; },
            [&](const RadialExt& r) {
                const double len = norm(v);
                if (len == 0.0) return v;
                return r.phi.eval(v / len) * len;
            },
            [&](const Psi& p) {
                const auto j = locate_replication_disk(v);
                if (!j) return v;
                return replication_rho(*j, p.g.eval(rho_inverse(*j, v)));
            },
            [&](const PhiTranslated& p) {
                const auto j = locate_translated(v, p);
                if (!j) return v;
                const double shift = 2.0 * static_cast<double>(*j);
                return translate_e1(translated_factor(p, *j).eval(translate_e1(v, -shift)), shift);
            },
            [&](const Product& p) {
                const int k = p.f.dim();
                return concat(p.f.eval_unchecked(slice(v, 0, k)), p.g.eval_unchecked(slice(v, k, dim_ - k)));
            },
            [&](const Spiral& s) {
                const double len = norm(v);
                if (len == 0.0) return v;
                return s.profile.apply(len, v);
            },
            [&](const Pl& p) { return p.map.eval(v); },
            [&](const Compose& c) {
                VectorN z = v;
                for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) z = it->eval_unchecked(z);
                return z;
            },
            [&](const Inverse& i) { return i.inner.eval_inverse_unchecked(v); },
        },
        node_->v);
}

VectorN MapExpr::eval_inverse_unchecked(const VectorN& v) const {
    return std::visit(
        overloaded{
            [&](const Identity&) { return v; },
            [&](const Affine& a) {
                if (!a.m_inv) throw Error(Errc::not_invertible, "affine map with singular matrix");
                return *a.m_inv * (v - a.b);
            },
            [&](const RadialExt& r) {
                const double len = norm(v);
                if (len == 0.0) return v;
                return r.phi.eval_inverse(v / len) * len;
            },
            [&](const Psi& p) {
                // g maps each closed disk C_j onto itself, so v and its preimage share j.
                const auto j = locate_replication_disk(v);
                if (!j) return v;
                return replication_rho(*j, p.g.eval_inverse(rho_inverse(*j, v)));
            },
            [&](const PhiTranslated& p) {
                const auto j = locate_translated(v, p);
                if (!j) return v;
                const double shift = 2.0 * static_cast<double>(*j);
                return translate_e1(translated_factor(p, *j).eval_inverse(translate_e1(v, -shift)), shift);
            },
            [&](const Product& p) {
                const int k = p.f.dim();
                return concat(p.f.eval_inverse_unchecked(slice(v, 0, k)),
                              p.g.eval_inverse_unchecked(slice(v, k, dim_ - k)));
            },
            [&](const Spiral& s) {
                const double len = norm(v);
                if (len == 0.0) return v;
                return s.profile.apply_inverse(len, v);
            },
            [&](const Pl& p) { return p.map.eval_inverse(v); },
            [&](const Compose& c) {
                VectorN z = v;
                for (const MapExpr& part : c.parts) z = part.eval_inverse_unchecked(z);
                return z;
            },
            [&](const Inverse& i) { return i.inner.eval_unchecked(v); },
        },
        node_->v);
}

VectorN MapExpr::displacement_unchecked(const VectorN& v) const {
    return std::visit(
        overloaded{
            [&](const Identity&) { return VectorN(dim_); },
            [&](const Affine& a) { return a.m * v + a.b - v; },
            [&](const RadialExt& r) {
                const double len = norm(v);
                if (len == 0.0) return VectorN(dim_);
                const VectorN u = v / len;
                return (r.phi.eval(u) - u) * len;
            },
            [&](const Psi& p) {
                const auto j = locate_replication_disk(v);
                if (!j) return VectorN(dim_);
                return p.g.displacement(rho_inverse(*j, v)) * replication_radius(*j);
            },
            [&](const PhiTranslated& p) {
                const auto j = locate_translated(v, p);
                if (!j) return VectorN(dim_);
                const double shift = 2.0 * static_cast<double>(*j);
                return translated_factor(p, *j).displacement(translate_e1(v, -shift));
            },
            [&](const Product& p) {
                const int k = p.f.dim();
                return concat(p.f.displacement_unchecked(slice(v, 0, k)),
                              p.g.displacement_unchecked(slice(v, k, dim_ - k)));
            },
            [&](const Spiral& s) {
                const double len = norm(v);
                if (len == 0.0) return VectorN(dim_);
                return s.profile.apply(len, v) - v;
            },
            [&](const Pl& p) { return p.map.eval(v) - v; },
            [&](const Compose& c) {
                VectorN z = v;
                VectorN total(dim_);
                for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) {
                    total += it->displacement_unchecked(z);
                    z = it->eval_unchecked(z);
                }
                return total;
            },
            [&](const Inverse& i) {
                // f^{-1}(v) - v = -(f(x') - x') with x' = f^{-1}(v).
                const VectorN pre = i.inner.eval_inverse_unchecked(v);
                return -i.inner.displacement_unchecked(pre);
            },
        },
        node_->v);
}

// --- constructors ----------------------------------------------------------------------------

namespace {

std::optional<double> mul(std::optional<double> a, std::optional<double> b) {
    return (a && b) ? std::optional<double>(*a * *b) : std::nullopt;
}

std::optional<double> max_of(std::optional<double> a, std::optional<double> b) {
    return (a && b) ? std::optional<double>(std::max(*a, *b)) : std::nullopt;
}

}  // namespace

MapExpr compose(const MapExpr& f, const MapExpr& g) { return compose_all({f, g}); }

MapExpr compose_all(std::vector<MapExpr> parts) {
    if (parts.empty()) throw Error(Errc::invalid_argument, "compose needs at least one map");
    const int dim = parts.front().dim();
    std::optional<double> lambda = 1.0;
    for (const MapExpr& p : parts) {
        require_same_dim(p.dim(), dim, "compose");
        lambda = mul(lambda, p.lambda_theoretical());
    }
    return make_map(MapExpr::Node{MapExpr::Compose{std::move(parts)}}, dim, lambda);
}

MapExpr inverse(const MapExpr& f) {
    if (const auto* inv = std::get_if<MapExpr::Inverse>(&f.node().v)) return inv->inner;
    return make_map(MapExpr::Node{MapExpr::Inverse{f}}, f.dim(), f.lambda_theoretical());
}

MapExpr radial_extension(const SphereMap& phi) {
    std::optional<double> lambda;
    if (phi.lambda_theoretical()) lambda = 1.0 + *phi.lambda_theoretical();
    return make_map(MapExpr::Node{MapExpr::RadialExt{phi}}, phi.dim(), lambda);
}

MapExpr disk_replication(const DiskMap& g) {
    return make_map(MapExpr::Node{MapExpr::Psi{g}}, g.dim(), g.lambda_theoretical());
}

MapExpr translated_replication(std::vector<DiskMap> gs) {
    if (gs.empty()) throw Error(Errc::invalid_argument, "translated replication needs at least one disk map");
    if (gs.size() > 1'000'000) throw Error(Errc::invalid_argument, "translated replication list longer than 10^6");
    const int dim = gs.front().dim();
    std::optional<double> lambda = 1.0;
    for (const DiskMap& g : gs) {
        require_same_dim(g.dim(), dim, "translated replication");
        lambda = max_of(lambda, g.lambda_theoretical());
    }
    return make_map(MapExpr::Node{MapExpr::PhiTranslated{std::move(gs), false}}, dim, lambda);
}

MapExpr translated_replication_uniform(const DiskMap& g) {
    return make_map(MapExpr::Node{MapExpr::PhiTranslated{{g}, true}}, g.dim(), g.lambda_theoretical());
}

MapExpr product_map(const MapExpr& f, const MapExpr& g) {
    const int dim = f.dim() + g.dim();
    if (dim > kMaxDim) throw Error(Errc::dim_mismatch, "product dimension above 16");
    return make_map(MapExpr::Node{MapExpr::Product{f, g}}, dim, max_of(f.lambda_theoretical(), g.lambda_theoretical()));
}

MapExpr spiral_map(const SpiralProfile& p) {
    const double lambda = p.dim() * p.c_bound() + 1.0;
    return make_map(MapExpr::Node{MapExpr::Spiral{p}}, p.dim(), lambda);
}

MapExpr pl_map(const PLMap& f) {
    std::optional<double> lambda;
    try {
        lambda = pl_bilip_constant(f);
    } catch (const Error&) {
        lambda.reset();
    }
    return make_map(MapExpr::Node{MapExpr::Pl{f}}, f.dim(), lambda);
}

MatrixN jacobian_fd(const MapExpr& m, const VectorN& x, std::optional<double> h) {
    require_same_dim(x.dim(), m.dim(), "jacobian_fd");
    const double step = h.value_or(1e-5 * std::max(1.0, norm(x)));
    if (!(step > 0.0)) throw Error(Errc::invalid_argument, "finite-difference step must be positive");
    MatrixN j(m.dim());
    for (int k = 0; k < m.dim(); ++k) {
        VectorN xp = x;
        VectorN xm = x;
        xp[k] += step;
        xm[k] -= step;
        j.set_column(k, (m.eval(xp) - m.eval(xm)) / (2.0 * step));
    }
    return j;
}

}  // namespace qimaps
