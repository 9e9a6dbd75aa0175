#pragma once

// Piecewise-linear homeomorphisms on Kuhn-triangulated cubes [lo, hi]^n.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "qimaps/core.hpp"

namespace qimaps {

inline constexpr int kMaxPlDim = 6;
inline constexpr int kMaxPlResolution = 64;

/// Kuhn (Freudenthal) subdivision of a regular grid on the cube [lo, hi]^n.
/// Grid cube c is split into n! simplices, one per permutation pi of the axes:
/// the simplex {t_pi(1) >= ... >= t_pi(n)} of local cube coordinates t.
/// Simplex id = linear cube index * n! + lexicographic rank of pi.
class Triangulation {
public:
    Triangulation(int dim, double lo, double hi, int resolution);

    int dim() const noexcept { return dim_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    int resolution() const noexcept { return res_; }
    double step() const noexcept { return step_; }

    std::size_t vertex_count() const noexcept { return vertex_count_; }
    std::size_t cube_count() const noexcept { return cube_count_; }
    std::size_t simplex_count() const noexcept { return cube_count_ * perms_per_cube_; }
    std::size_t simplices_per_cube() const noexcept { return perms_per_cube_; }

    VectorN vertex(std::size_t index) const;
    std::array<int, kMaxPlDim> vertex_lattice(std::size_t index) const;
    std::size_t vertex_index(const std::array<int, kMaxPlDim>& lattice) const;
    bool is_boundary_vertex(std::size_t index) const;

    /// The n + 1 vertex indices of a simplex, in path order v_0, ..., v_n.
    std::vector<std::size_t> simplex_vertices(std::size_t simplex) const;
    /// Axis visited at each path step (the permutation pi).
    std::array<int, kMaxPlDim> simplex_axes(std::size_t simplex) const;
    /// Lattice coordinates of the cube's lower corner.
    std::array<int, kMaxPlDim> simplex_cube(std::size_t simplex) const;
    double simplex_volume(std::size_t simplex) const;

    bool contains(const VectorN& x) const;

    struct Location {
        std::size_t simplex;
        std::array<double, kMaxPlDim + 1> barycentric;
    };
    /// Containing simplex and barycentric coordinates. Coordinates within 1e-12
    /// (relative to the box width) of the box are clamped; ties between simplices
    /// resolve to the lexicographically smallest axis ordering.
    Location locate(const VectorN& x) const;
    /// Affine barycentric coordinates of x with respect to any simplex (may be negative).
    std::array<double, kMaxPlDim + 1> barycentric(std::size_t simplex, const VectorN& x) const;

private:
    int dim_;
    double lo_, hi_;
    int res_;
    double step_;
    std::size_t vertex_count_;
    std::size_t cube_count_;
    std::size_t perms_per_cube_;
    std::vector<std::array<int, kMaxPlDim>> perms_;  // lexicographic order
    std::vector<int> perm_rank_;                     // base-n code -> rank
};

Triangulation kuhn_triangulation(int dim, double lo, double hi, int resolution);

/// Simplex-wise affine map given by one image point per triangulation vertex.
/// Invariants (boundary fixity, positive orientation) are reported by
/// pl_validate rather than enforced here, so broken maps can be inspected.
class PLMap {
public:
    PLMap(Triangulation tri, std::vector<VectorN> vertex_images, bool boundary_fixed);

    static PLMap identity(const Triangulation& tri);
    /// Vertex images m v + b; boundary not fixed.
    static PLMap affine(const Triangulation& tri, const MatrixN& m, const VectorN& b);

    const Triangulation& triangulation() const noexcept { return data_->tri; }
    const std::vector<VectorN>& vertex_images() const noexcept { return data_->images; }
    bool boundary_fixed() const noexcept { return data_->boundary_fixed; }
    int dim() const noexcept { return data_->tri.dim(); }

    /// Differential T_sigma f of one simplex.
    MatrixN differential(std::size_t simplex) const;
    /// Affine extension of the map on one simplex, evaluated at x.
    VectorN eval_in_simplex(std::size_t simplex, const VectorN& x) const;
    VectorN eval(const VectorN& x) const;
    /// Point location in the image triangulation; requires a valid homeomorphism.
    VectorN eval_inverse(const VectorN& y) const;

private:
    struct Data {
        Triangulation tri;
        std::vector<VectorN> images;
        bool boundary_fixed;
        // Image-side bucket grid for inverse lookup.
        VectorN bucket_lo, bucket_hi;
        int bucket_res = 1;
        std::vector<std::vector<std::uint32_t>> buckets;
    };
    static void build_buckets(Data& d);
    std::shared_ptr<const Data> data_;
};

VectorN pl_eval(const PLMap& f, const VectorN& x);

struct PLNorm {
    double norm;
    std::size_t argmax_simplex;
};
/// sup over simplices of the operator norm of the simplex differential.
PLNorm pl_differential_norm(const PLMap& f);

/// max(||f||, ||f^-1||), where the inverse differentials are the per-simplex
/// matrix inverses. Throws not_homeomorphism if any orientation is not positive.
double pl_bilip_constant(const PLMap& f);

struct PLValidation {
    bool ok = true;
    std::vector<std::int8_t> det_signs;  // per simplex: +1, 0 (degenerate), -1
    std::vector<std::size_t> negative_simplices;
    std::vector<std::size_t> degenerate_simplices;
    std::vector<std::size_t> boundary_violations;  // vertex indices
};
PLValidation pl_validate(const PLMap& f);

/// Boundary-fixed map on [-1, 1]^n rotating each interior vertex v in the
/// (0, 1) plane by d * prod_i (1 - v_i^2). Throws displacement_too_large if
/// any simplex flips.
PLMap pl_twist_example(int dim, int resolution, double d);

/// CSV layout:
///   n,box_lo,box_hi,resolution,boundary_fixed
///   <values>
///   index,y0,...,y{n-1}
///   one row per vertex, 17 significant digits
void write_plmap_csv(std::ostream& out, const PLMap& f);
PLMap read_plmap_csv(std::istream& in);

}  // namespace qimaps
