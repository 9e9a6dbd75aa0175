#include "qimaps/core.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace qimaps {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_matrix: return "invalid-matrix";
        case Errc::off_sphere: return "off-sphere";
        case Errc::invalid_plane: return "invalid-plane";
        case Errc::invalid_point: return "invalid-point";
        case Errc::dim_mismatch: return "dim-mismatch";
        case Errc::not_invertible: return "not-invertible";
        case Errc::support_violation: return "support-violation";
        case Errc::monotonicity: return "monotonicity";
        case Errc::empty_grid: return "empty-grid";
        case Errc::out_of_domain: return "out-of-domain";
        case Errc::degenerate_simplex: return "degenerate-simplex";
        case Errc::not_homeomorphism: return "not-homeomorphism";
        case Errc::displacement_too_large: return "displacement-too-large";
        case Errc::insufficient_samples: return "insufficient-samples";
        case Errc::empty_region: return "empty-region";
        case Errc::trivial_witness: return "trivial-witness";
        case Errc::no_witness: return "no-witness";
        case Errc::disconnected_cloud: return "disconnected-cloud";
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::parse_error: return "parse-error";
        case Errc::io_error: return "io-error";
    }
    return "unknown";
}

void check_dim(int dim, const char* what) {
    if (dim < 1 || dim > kMaxDim) {
        throw Error(Errc::dim_mismatch, std::string(what) + ": dimension " + std::to_string(dim) +
                                            " outside [1, " + std::to_string(kMaxDim) + "]");
    }
}

void require_same_dim(int a, int b, const char* what) {
    if (a != b) {
        throw Error(Errc::dim_mismatch,
                    std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

// --- VectorN -----------------------------------------------------------------

VectorN::VectorN(int dim) : dim_(dim) { check_dim(dim, "VectorN"); }

VectorN::VectorN(std::initializer_list<double> coords) : dim_(static_cast<int>(coords.size())) {
    check_dim(dim_, "VectorN");
    std::copy(coords.begin(), coords.end(), c_.begin());
}

VectorN VectorN::from(std::span<const double> coords) {
    VectorN v(static_cast<int>(coords.size()));
    std::copy(coords.begin(), coords.end(), v.c_.begin());
    return v;
}

VectorN VectorN::unit(int dim, int axis) {
    VectorN v(dim);
    if (axis < 0 || axis >= dim) {
        throw Error(Errc::invalid_argument, "unit vector axis out of range");
    }
    v[axis] = 1.0;
    return v;
}

bool VectorN::all_finite() const noexcept {
    for (int i = 0; i < dim_; ++i) {
        if (!std::isfinite(c_[static_cast<std::size_t>(i)])) return false;
    }
    return true;
}

VectorN& VectorN::operator+=(const VectorN& o) noexcept {
    for (int i = 0; i < dim_; ++i) (*this)[i] += o[i];
    return *this;
}

VectorN& VectorN::operator-=(const VectorN& o) noexcept {
    for (int i = 0; i < dim_; ++i) (*this)[i] -= o[i];
    return *this;
}

VectorN& VectorN::operator*=(double s) noexcept {
    for (int i = 0; i < dim_; ++i) (*this)[i] *= s;
    return *this;
}

VectorN& VectorN::operator/=(double s) noexcept {
    for (int i = 0; i < dim_; ++i) (*this)[i] /= s;
    return *this;
}

bool VectorN::operator==(const VectorN& o) const noexcept {
    if (dim_ != o.dim_) return false;
    for (int i = 0; i < dim_; ++i) {
        if ((*this)[i] != o[i]) return false;
    }
    return true;
}

double dot(const VectorN& a, const VectorN& b) noexcept {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const VectorN& v) noexcept {
    return std::sqrt(dot(v, v));
}

double distance(const VectorN& a, const VectorN& b) noexcept { return norm(a - b); }

VectorN concat(const VectorN& x, const VectorN& y) {
    VectorN out(x.dim() + y.dim());
    for (int i = 0; i < x.dim(); ++i) out[i] = x[i];
    for (int i = 0; i < y.dim(); ++i) out[x.dim() + i] = y[i];
    return out;
}

VectorN slice(const VectorN& v, int offset, int count) {
    if (offset < 0 || count < 1 || offset + count > v.dim()) {
        throw Error(Errc::dim_mismatch, "slice out of range");
    }
    VectorN out(count);
    for (int i = 0; i < count; ++i) out[i] = v[offset + i];
    return out;
}

// --- MatrixN -----------------------------------------------------------------

MatrixN::MatrixN(int dim) : dim_(dim) { check_dim(dim, "MatrixN"); }

MatrixN MatrixN::identity(int dim) {
    MatrixN m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

MatrixN MatrixN::diagonal(std::span<const double> d) {
    MatrixN m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return m;
}

MatrixN MatrixN::from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    if (n < 1 || n > kMaxDim) throw Error(Errc::invalid_matrix, "matrix must have 1..16 rows");
    MatrixN m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n) {
            throw Error(Errc::invalid_matrix, "matrix is not square");
        }
        for (int j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

MatrixN MatrixN::from_row_major(int dim, std::span<const double> entries) {
    if (dim < 1 || dim > kMaxDim || entries.size() != static_cast<std::size_t>(dim * dim)) {
        throw Error(Errc::invalid_matrix, "row-major entry count does not match a square matrix");
    }
    MatrixN m(dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) m(i, j) = entries[static_cast<std::size_t>(i * dim + j)];
    }
    return m;
}

bool MatrixN::all_finite() const noexcept {
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            if (!std::isfinite((*this)(i, j))) return false;
        }
    }
    return true;
}

MatrixN MatrixN::transpose() const {
    MatrixN t(dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
}

VectorN MatrixN::column(int j) const {
    VectorN v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = (*this)(i, j);
    return v;
}

void MatrixN::set_column(int j, const VectorN& v) {
    for (int i = 0; i < dim_; ++i) (*this)(i, j) = v[i];
}

MatrixN& MatrixN::operator+=(const MatrixN& o) noexcept {
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) (*this)(i, j) += o(i, j);
    }
    return *this;
}

MatrixN& MatrixN::operator-=(const MatrixN& o) noexcept {
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) (*this)(i, j) -= o(i, j);
    }
    return *this;
}

MatrixN& MatrixN::operator*=(double s) noexcept {
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) (*this)(i, j) *= s;
    }
    return *this;
}

MatrixN operator*(const MatrixN& a, const MatrixN& b) {
    require_same_dim(a.dim(), b.dim(), "matrix product");
    MatrixN c(a.dim());
    for (int i = 0; i < a.dim(); ++i) {
        for (int k = 0; k < a.dim(); ++k) {
            const double aik = a(i, k);
            for (int j = 0; j < a.dim(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

VectorN operator*(const MatrixN& a, const VectorN& x) {
    require_same_dim(a.dim(), x.dim(), "matrix-vector product");
    VectorN y(a.dim());
    for (int i = 0; i < a.dim(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.dim(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

namespace {

void require_valid(const MatrixN& m) {
    if (m.dim() < 1) throw Error(Errc::invalid_matrix, "empty matrix");
    if (!m.all_finite()) throw Error(Errc::invalid_matrix, "non-finite entry");
}

// Eigenvalues of the symmetric matrix s, by cyclic Jacobi rotations.
std::array<double, kMaxDim> symmetric_eigenvalues(MatrixN s) {
    const int n = s.dim();
    constexpr int kMaxSweeps = 100;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) total += s(i, j) * s(i, j);
    }
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        }
        if (off <= 1e-32 * total || off == 0.0) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (apq == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double skp = s(k, p);
                    const double skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    const double spk = s(p, k);
                    const double sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
    std::array<double, kMaxDim> ev{};
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = s(i, i);
    return ev;
}

std::array<double, kMaxDim> gram_eigenvalues(const MatrixN& m) {
    return symmetric_eigenvalues(m.transpose() * m);
}

}  // namespace

double operator_norm(const MatrixN& m) {
    require_valid(m);
    const auto ev = gram_eigenvalues(m);
    double top = 0.0;
    for (int i = 0; i < m.dim(); ++i) top = std::max(top, ev[static_cast<std::size_t>(i)]);
    return std::sqrt(top);
}

double min_singular_value(const MatrixN& m) {
    require_valid(m);
    const auto ev = gram_eigenvalues(m);
    double low = ev[0];
    for (int i = 1; i < m.dim(); ++i) low = std::min(low, ev[static_cast<std::size_t>(i)]);
    return std::sqrt(std::max(0.0, low));
}

double frobenius_norm(const MatrixN& m) {
    require_valid(m);
    double s = 0.0;
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) s += m(i, j) * m(i, j);
    }
    return std::sqrt(s);
}

double determinant(const MatrixN& m) {
    require_valid(m);
    MatrixN a = m;
    const int n = a.dim();
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        }
        if (a(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
            det = -det;
        }
        det *= a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
        }
    }
    return det;
}

MatrixN inverse(const MatrixN& m) {
    require_valid(m);
    const int n = m.dim();
    MatrixN a = m;
    MatrixN inv = MatrixN::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        }
        if (a(piv, col) == 0.0) throw Error(Errc::not_invertible, "singular matrix");
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        const double d = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

double sphere_geodesic(const VectorN& x, const VectorN& y) {
    require_same_dim(x.dim(), y.dim(), "sphere_geodesic");
    const double nx = norm(x);
    const double ny = norm(y);
    if (!(std::abs(nx - 1.0) <= 1e-9) || !(std::abs(ny - 1.0) <= 1e-9)) {
        throw Error(Errc::off_sphere, "sphere_geodesic: point not on the unit sphere");
    }
    const VectorN ux = x / nx;
    const VectorN uy = y / ny;
    // atan2 of chord and anti-chord equals arccos(<x,y>) without the cancellation
    // arccos suffers next to 1, so the result never drops below the chord.
    const double chord = norm(ux - uy);
    const double anti = norm(ux + uy);
    const double angle = 2.0 * std::atan2(chord, anti);
    return std::clamp(angle, 0.0, std::numbers::pi);
}

MatrixN rotation_matrix(int i, int j, double angle, int dim) {
    check_dim(dim, "rotation_matrix");
    if (i < 0 || j < 0 || i >= dim || j >= dim || i >= j) {
        throw Error(Errc::invalid_plane, "rotation plane (" + std::to_string(i) + "," +
                                             std::to_string(j) + ") invalid for dimension " +
                                             std::to_string(dim));
    }
    if (!std::isfinite(angle)) throw Error(Errc::invalid_argument, "rotation angle not finite");
    MatrixN r = MatrixN::identity(dim);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    r(i, i) = c;
    r(j, j) = c;
    r(j, i) = s;
    r(i, j) = -s;
    return r;
}

}  // namespace qimaps
