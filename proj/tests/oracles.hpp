#pragma once

// Test-side reference computations. They deliberately use different
// algorithms from the library (closed forms, brute force, dense sampling) so
// that agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "qimaps/core.hpp"
#include "qimaps/maps.hpp"
#include "qimaps/pl.hpp"

namespace oracle {

using qimaps::MatrixN;
using qimaps::VectorN;

/// Largest singular value of a 2x2 matrix in closed form.
inline double norm2x2(double a, double b, double c, double d) {
    const double s = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    return std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4.0 * det * det))));
}

/// Smallest singular value of a 2x2 matrix in closed form.
inline double min_sv2x2(double a, double b, double c, double d) {
    const double big = norm2x2(a, b, c, d);
    return big == 0.0 ? 0.0 : std::abs(a * d - b * c) / big;
}

/// Operator norm by power iteration on M^T M from several starts.
inline double operator_norm_power(const MatrixN& m, int iterations = 3000) {
    const int n = m.dim();
    const MatrixN mtm = m.transpose() * m;
    double best = 0.0;
    for (int start = 0; start <= n; ++start) {
        VectorN v(n);
        for (int k = 0; k < n; ++k) v[k] = (start == n) ? 1.0 + 0.1 * k : (k == start ? 1.0 : 0.0);
        for (int it = 0; it < iterations; ++it) {
            VectorN w = mtm * v;
            const double wn = qimaps::norm(w);
            if (wn == 0.0) break;
            v = w / wn;
        }
        best = std::max(best, qimaps::norm(m * v));
    }
    return best;
}

/// Determinant by cofactor expansion (n <= 6).
inline double det_cofactor(const MatrixN& m) {
    const int n = m.dim();
    if (n == 1) return m(0, 0);
    double total = 0.0;
    for (int col = 0; col < n; ++col) {
        MatrixN minor(n - 1);
        for (int i = 1; i < n; ++i) {
            int cj = 0;
            for (int j = 0; j < n; ++j) {
                if (j == col) continue;
                minor(i - 1, cj++) = m(i, j);
            }
        }
        total += ((col % 2) ? -1.0 : 1.0) * m(0, col) * det_cofactor(minor);
    }
    return total;
}

/// sup over dense directions u of |M u| for n = 2 (angles) or n = 3 (Fibonacci sphere).
inline double dense_direction_norm(const MatrixN& m, int samples) {
    double best = 0.0;
    if (m.dim() == 2) {
        for (int k = 0; k < samples; ++k) {
            const double t = std::numbers::pi * k / samples;
            best = std::max(best, qimaps::norm(m * VectorN{std::cos(t), std::sin(t)}));
        }
    } else {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < samples; ++k) {
            const double z = 1.0 - (2.0 * k + 1.0) / samples;
            const double r = std::sqrt(1.0 - z * z);
            best = std::max(best, qimaps::norm(m * VectorN{r * std::cos(golden * k), r * std::sin(golden * k), z}));
        }
    }
    return best;
}

/// Latitude reparametrization inverse by plain bisection.
inline double latitude_inverse_angle(double beta, double target) {
    double lo = 0.0, hi = std::numbers::pi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid + beta * std::sin(mid) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Brute-force point location: any simplex whose barycentric coordinates are all >= -tol.
inline bool in_some_simplex(const qimaps::Triangulation& t, const VectorN& x, double tol, std::size_t* found) {
    for (std::size_t s = 0; s < t.simplex_count(); ++s) {
        const auto b = t.barycentric(s, x);
        bool inside = true;
        for (int k = 0; k <= t.dim(); ++k) inside = inside && b[static_cast<std::size_t>(k)] >= -tol;
        if (inside) {
            if (found) *found = s;
            return true;
        }
    }
    return false;
}

/// Exact bi-Lipschitz constant of a twist from the singular values of its
/// differential, computed in closed form in the polar frame: on the rotation
/// plane the differential is R(theta) (I + s e_phi e_r^T), s = r theta'(r), whose
/// singular values are (sqrt(s^2 + 4) +- |s|) / 2.
inline double twist_constant_from_shear(double s) {
    const double a = std::abs(s);
    const double big = (std::sqrt(a * a + 4.0) + a) / 2.0;
    const double small = (std::sqrt(a * a + 4.0) - a) / 2.0;
    return std::max(big, 1.0 / small);
}

/// Dense scan of sup_r |r theta'(r)| by central differences of theta.
inline double scan_r_theta_prime(const qimaps::AngleProfile& p, int samples) {
    double best = 0.0;
    const double h = 1e-6;
    for (int k = 1; k < samples; ++k) {
        const double r = p.end() * k / samples;
        best = std::max(best, std::abs(r * (p(r + h) - p(r - h)) / (2.0 * h)));
    }
    return best;
}

/// Deterministic generator for tests.
struct Gen {
    std::mt19937_64 eng;
    explicit Gen(std::uint64_t seed) : eng(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    VectorN vector(int n, double lo, double hi) {
        VectorN v(n);
        for (int k = 0; k < n; ++k) v[k] = uniform(lo, hi);
        return v;
    }
    MatrixN matrix(int n, double lo, double hi) {
        MatrixN m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = uniform(lo, hi);
        return m;
    }
    /// Random rotation as a product of plane rotations.
    MatrixN rotation(int n) {
        MatrixN r = MatrixN::identity(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) r = qimaps::rotation_matrix(i, j, uniform(-3.0, 3.0), n) * r;
        return r;
    }
    VectorN unit(int n) {
        while (true) {
            VectorN v(n);
            for (int k = 0; k < n; ++k) v[k] = std::normal_distribution<double>()(eng);
            const double len = qimaps::norm(v);
            if (len > 1e-6) return v / len;
        }
    }
    VectorN in_ball(int n, double radius) {
        return unit(n) * (radius * std::pow(uniform(0.0, 1.0), 1.0 / n));
    }
};


/// Boundary-fixed PL map with each interior vertex displaced uniformly by up to
/// `amplitude` grid steps per coordinate; amplitude halves until orientation holds.
inline qimaps::PLMap random_interior_displacement(int n, int resolution, double amplitude, std::uint64_t seed) {
    qimaps::Triangulation tri(n, -1.0, 1.0, resolution);
    Gen gen(seed);
    for (int attempt = 0; attempt < 20; ++attempt, amplitude *= 0.5) {
        std::vector<VectorN> images;
        for (std::size_t v = 0; v < tri.vertex_count(); ++v) {
            VectorN p = tri.vertex(v);
            if (!tri.is_boundary_vertex(v)) p += gen.vector(n, -amplitude, amplitude) * tri.step();
            images.push_back(p);
        }
        qimaps::PLMap f(tri, images, true);
        if (qimaps::pl_validate(f).ok) return f;
    }
    return qimaps::PLMap::identity(tri);
}

/// Sup of |f(x + h u) - f(x)| / h over simplex centroids and dense directions u:
/// a difference-quotient estimate of the PL differential norm.
inline double difference_quotient_norm(const qimaps::PLMap& f, int directions) {
    const qimaps::Triangulation& t = f.triangulation();
    const int n = t.dim();
    const double h = 1e-3 * t.step();
    double best = 0.0;
    for (std::size_t s = 0; s < t.simplex_count(); ++s) {
        VectorN c(n);
        for (std::size_t v : t.simplex_vertices(s)) c += t.vertex(v);
        c /= static_cast<double>(n + 1);
        const VectorN fc = f.eval_in_simplex(s, c);
        auto probe = [&](const VectorN& u) { best = std::max(best, qimaps::norm(f.eval(c + u * h) - fc) / h); };
        if (n == 2) {
            for (int k = 0; k < directions; ++k) {
                const double a = 2.0 * std::numbers::pi * k / directions;
                probe(VectorN{std::cos(a), std::sin(a)});
            }
        } else {
            const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
            for (int k = 0; k < directions; ++k) {
                const double z = 1.0 - (2.0 * k + 1.0) / directions;
                const double r = std::sqrt(1.0 - z * z);
                probe(VectorN{r * std::cos(golden * k), r * std::sin(golden * k), z});
            }
        }
    }
    return best;
}

}  // namespace oracle
