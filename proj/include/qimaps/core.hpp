#pragma once

// Small fixed-capacity dense linear algebra. Vectors and matrices live entirely
// on the stack so that the sampling kernels can evaluate maps millions of times
// without touching the allocator.

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "qimaps/error.hpp"

namespace qimaps {

inline constexpr int kMaxDim = 16;

class VectorN {
public:
    VectorN() = default;
    explicit VectorN(int dim);
    VectorN(std::initializer_list<double> coords);

    static VectorN from(std::span<const double> coords);
    static VectorN unit(int dim, int axis);

    int dim() const noexcept { return dim_; }
    double operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }

    std::span<const double> coords() const noexcept { return {c_.data(), static_cast<std::size_t>(dim_)}; }
    std::span<double> coords() noexcept { return {c_.data(), static_cast<std::size_t>(dim_)}; }

    bool all_finite() const noexcept;

    VectorN& operator+=(const VectorN& o) noexcept;
    VectorN& operator-=(const VectorN& o) noexcept;
    VectorN& operator*=(double s) noexcept;
    VectorN& operator/=(double s) noexcept;

    friend VectorN operator+(VectorN a, const VectorN& b) noexcept { return a += b; }
    friend VectorN operator-(VectorN a, const VectorN& b) noexcept { return a -= b; }
    friend VectorN operator*(VectorN a, double s) noexcept { return a *= s; }
    friend VectorN operator*(double s, VectorN a) noexcept { return a *= s; }
    friend VectorN operator/(VectorN a, double s) noexcept { return a /= s; }
    friend VectorN operator-(VectorN a) noexcept { return a *= -1.0; }

    bool operator==(const VectorN& o) const noexcept;

private:
    std::array<double, kMaxDim> c_{};
    int dim_ = 0;
};

double dot(const VectorN& a, const VectorN& b) noexcept;
double norm(const VectorN& v) noexcept;
double distance(const VectorN& a, const VectorN& b) noexcept;
/// Concatenation (x, y) in R^{k+l}.
VectorN concat(const VectorN& x, const VectorN& y);
/// Coordinates [offset, offset+count).
VectorN slice(const VectorN& v, int offset, int count);

class MatrixN {
public:
    MatrixN() = default;
    explicit MatrixN(int dim);  // zero matrix

    static MatrixN identity(int dim);
    static MatrixN diagonal(std::span<const double> d);
    /// Row-major construction; throws invalid_matrix unless rows form a square.
    static MatrixN from_rows(const std::vector<std::vector<double>>& rows);
    static MatrixN from_row_major(int dim, std::span<const double> entries);

    int dim() const noexcept { return dim_; }
    double operator()(int i, int j) const noexcept { return a_[idx(i, j)]; }
    double& operator()(int i, int j) noexcept { return a_[idx(i, j)]; }

    bool all_finite() const noexcept;
    MatrixN transpose() const;
    VectorN column(int j) const;
    void set_column(int j, const VectorN& v);

    MatrixN& operator+=(const MatrixN& o) noexcept;
    MatrixN& operator-=(const MatrixN& o) noexcept;
    MatrixN& operator*=(double s) noexcept;
    friend MatrixN operator+(MatrixN a, const MatrixN& b) noexcept { return a += b; }
    friend MatrixN operator-(MatrixN a, const MatrixN& b) noexcept { return a -= b; }
    friend MatrixN operator*(MatrixN a, double s) noexcept { return a *= s; }

    friend MatrixN operator*(const MatrixN& a, const MatrixN& b);
    friend VectorN operator*(const MatrixN& a, const VectorN& x);

private:
    static std::size_t idx(int i, int j) noexcept {
        return static_cast<std::size_t>(i) * kMaxDim + static_cast<std::size_t>(j);
    }
    std::array<double, kMaxDim * kMaxDim> a_{};
    int dim_ = 0;
};

/// Largest singular value. Cyclic Jacobi on M^T M; accurate to a few ulps.
double operator_norm(const MatrixN& m);
double frobenius_norm(const MatrixN& m);
/// Smallest singular value (0 for singular input).
double min_singular_value(const MatrixN& m);
double determinant(const MatrixN& m);
/// Gaussian elimination with partial pivoting; throws not_invertible on a zero pivot.
MatrixN inverse(const MatrixN& m);

/// Intrinsic (great-circle) distance between two points of the unit sphere.
double sphere_geodesic(const VectorN& x, const VectorN& y);

/// Rotation by `angle` in the coordinate plane (i, j), 0-based, i < j.
/// Maps e_i to cos(angle) e_i + sin(angle) e_j.
MatrixN rotation_matrix(int i, int j, double angle, int dim);

/// Applies rotation_matrix(i, j, angle, v.dim()) to v without forming the matrix.
inline VectorN rotate_in_plane(VectorN v, int i, int j, double angle) noexcept {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double vi = v[i];
    const double vj = v[j];
    v[i] = c * vi - s * vj;
    v[j] = s * vi + c * vj;
    return v;
}

void check_dim(int dim, const char* what);
void require_same_dim(int a, int b, const char* what);

}  // namespace qimaps
