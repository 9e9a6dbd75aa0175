#pragma once

// Exactly evaluable self-maps of R^n: radial extensions of sphere maps,
// disk-replication embeddings, translated replications, products, spiral maps
// and PL homeomorphisms, closed under composition and inversion.
//
// All map values are immutable trees behind shared pointers; copying is cheap
// and evaluation is pure, so a MapExpr may be evaluated from many threads.

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "qimaps/angle_profile.hpp"
#include "qimaps/core.hpp"
#include "qimaps/pl.hpp"

namespace qimaps {

// --- sphere maps -------------------------------------------------------------------

/// Homeomorphism of the unit sphere S^{n-1}. lambda_theoretical() is a claimed
/// bi-Lipschitz constant for the chordal metric; it is metadata to be tested,
/// never an input to the estimators.
class SphereMap {
public:
    struct Orthogonal;
    /// Polar angle a from `axis` is reparametrized to a + beta sin(a).
    struct Latitude;
    struct Conjugated;
    /// parts[0] o parts[1] o ... (the last part is applied first).
    struct Composed;
    struct Inverted;
    struct Node;

    static SphereMap identity(int dim);
    /// Throws invalid_matrix unless r is orthogonal to 1e-9.
    static SphereMap orthogonal(const MatrixN& r);
    static SphereMap latitude(double beta, const VectorN& axis);
    static SphereMap conjugated(const MatrixN& r, const SphereMap& inner);
    static SphereMap composed(std::vector<SphereMap> parts, int dim);

    int dim() const noexcept { return dim_; }
    std::optional<double> lambda_theoretical() const noexcept { return lambda_; }
    const Node& node() const noexcept { return *node_; }

    /// Input and output are renormalized when within 1e-9 of the sphere;
    /// anything further off raises off_sphere.
    VectorN eval(const VectorN& x) const;
    VectorN eval_inverse(const VectorN& x) const;
    SphereMap inverse() const;

private:
    SphereMap(std::shared_ptr<const Node> node, int dim, std::optional<double> lambda);
    VectorN apply(const VectorN& u) const;
    VectorN apply_inverse(const VectorN& u) const;

    std::shared_ptr<const Node> node_;
    int dim_ = 0;
    std::optional<double> lambda_;
};

struct SphereMap::Orthogonal {
    MatrixN r;
};
struct SphereMap::Latitude {
    double beta;
    VectorN axis;
};
struct SphereMap::Conjugated {
    MatrixN r;
    SphereMap inner;
};
struct SphereMap::Composed {
    std::vector<SphereMap> parts;
};
struct SphereMap::Inverted {
    SphereMap inner;
};
struct SphereMap::Node {
    std::variant<Orthogonal, Latitude, Conjugated, Composed, Inverted> v;
};

/// Geodesic-metric bi-Lipschitz claim max(1 + |beta|, 1 / (1 - |beta|)) of a latitude map.
double latitude_geodesic_claim(double beta);

SphereMap make_latitude_sphere_map(double beta, const VectorN& axis);

// --- disk maps ---------------------------------------------------------------------

/// Homeomorphism of the closed unit disk fixing the boundary sphere, extended by
/// the identity to all of R^n.
class DiskMap {
public:
    /// x -> R_{ij}(theta(|x|)) x inside the disk.
    struct Twist;
    /// A boundary-fixed PL map on [lo, hi]^n conjugated by the similarity taking
    /// the cube onto the cube inscribed in the unit disk.
    struct Pl;
    struct Composed;
    struct Inverted;
    struct Node;

    static DiskMap identity(int dim);
    static DiskMap twist(const AngleProfile& theta, int i, int j, int dim);
    /// Throws support_violation unless the PL map fixes its boundary;
    /// not_homeomorphism if it is not a valid PL homeomorphism.
    static DiskMap pl(const PLMap& map);
    static DiskMap composed(std::vector<DiskMap> parts, int dim);

    int dim() const noexcept { return dim_; }
    std::optional<double> lambda_theoretical() const noexcept { return lambda_; }
    const Node& node() const noexcept { return *node_; }
    bool is_identity() const noexcept;

    VectorN eval(const VectorN& x) const;
    VectorN eval_inverse(const VectorN& x) const;
    VectorN displacement(const VectorN& x) const { return eval(x) - x; }
    DiskMap inverse() const;

private:
    DiskMap(std::shared_ptr<const Node> node, int dim, std::optional<double> lambda);
    std::shared_ptr<const Node> node_;
    int dim_ = 0;
    std::optional<double> lambda_;
};

struct DiskMap::Twist {
    AngleProfile theta;
    int i, j;
};
struct DiskMap::Pl {
    PLMap map;
    double scale;   // similarity factor
    double center;  // cube center coordinate (all axes)
};
struct DiskMap::Composed {
    std::vector<DiskMap> parts;
};
struct DiskMap::Inverted {
    DiskMap inner;
};
struct DiskMap::Node {
    std::variant<Twist, Pl, Composed, Inverted> v;
};

/// Twist disk map; lambda_theoretical is the exact bi-Lipschitz constant
/// (S + sqrt(S^2 + 4)) / 2 of the shear-rotation, S = sup_r |r theta'(r)|.
DiskMap make_twist_disk_map(const AngleProfile& theta, int i, int j, int dim);

/// Exact bi-Lipschitz constant of a twist with profile sup |r theta'| = s.
double twist_bilip_constant(double s) noexcept;

// --- spiral profiles ------------------------------------------------------------------

/// C^1 curve f: (0, inf) -> SO(n) with certified |f'_{ij}(t)| <= c_bound / t.
class SpiralProfile {
public:
    struct Constant {
        MatrixN a;
    };
    /// f(t) = R_{ij}(c ln t).
    struct LogSpiral {
        double c;
        int i, j;
    };
    /// f(t) = R_{ij}(theta(t)), identity for t >= theta.end().
    struct Cutoff {
        AngleProfile theta;
        int i, j;
    };
    using Node = std::variant<Constant, LogSpiral, Cutoff>;

    /// Throws invalid_matrix unless a is in SO(n) to 1e-9.
    static SpiralProfile constant(const MatrixN& a);
    static SpiralProfile log_spiral(double c, int i, int j, int dim);
    static SpiralProfile cutoff(const AngleProfile& theta, int i, int j, int dim);

    int dim() const noexcept { return dim_; }
    double c_bound() const noexcept { return c_bound_; }
    const Node& node() const noexcept { return node_; }

    MatrixN at(double t) const;
    /// f(t) x and f(t)^{-1} x without forming the matrix.
    VectorN apply(double t, const VectorN& x) const;
    VectorN apply_inverse(double t, const VectorN& x) const;

private:
    SpiralProfile(Node node, int dim, double c_bound) : node_(std::move(node)), dim_(dim), c_bound_(c_bound) {}
    Node node_;
    int dim_ = 0;
    double c_bound_ = 0.0;
};

// --- map expressions ------------------------------------------------------------------

class MapExpr {
public:
    struct Identity;
    struct Affine;
    struct RadialExt;
    struct Psi;
    /// Translated copies g_j on the unit disks centred at 2j e_1. Uniform mode
    /// uses gs[0] for every j >= 0; list mode applies gs[j] for j < gs.size().
    struct PhiTranslated;
    struct Product;
    struct Spiral;
    struct Pl;
    /// parts[0] o parts[1] o ... (the last part is applied first).
    struct Compose;
    struct Inverse;
    struct Node;

    static MapExpr identity(int dim);
    static MapExpr affine(const MatrixN& m, const VectorN& b);

    int dim() const noexcept { return dim_; }
    /// Claimed bi-Lipschitz constant propagated from the constructors.
    std::optional<double> lambda_theoretical() const noexcept { return lambda_; }
    const Node& node() const noexcept { return *node_; }

    /// Throws invalid_point for non-finite input, dim_mismatch for the wrong dimension.
    VectorN eval(const VectorN& v) const;
    VectorN eval_inverse(const VectorN& v) const;
    /// f(v) - v computed node by node, so that large translation offsets (the
    /// 4^j e_1 of the replication disks) do not cancel.
    VectorN displacement(const VectorN& v) const;

    // Unchecked variants used inside hot loops after validation.
    VectorN eval_unchecked(const VectorN& v) const;
    VectorN eval_inverse_unchecked(const VectorN& v) const;
    VectorN displacement_unchecked(const VectorN& v) const;

private:
    friend MapExpr make_map(Node node, int dim, std::optional<double> lambda);
    MapExpr(std::shared_ptr<const Node> node, int dim, std::optional<double> lambda);
    std::shared_ptr<const Node> node_;
    int dim_ = 0;
    std::optional<double> lambda_;
};

struct MapExpr::Identity {};
struct MapExpr::Affine {
    MatrixN m;
    VectorN b;
    std::optional<MatrixN> m_inv;
};
struct MapExpr::RadialExt {
    SphereMap phi;
};
struct MapExpr::Psi {
    DiskMap g;
};
struct MapExpr::PhiTranslated {
    std::vector<DiskMap> gs;
    bool uniform;
};
struct MapExpr::Product {
    MapExpr f, g;
};
struct MapExpr::Spiral {
    SpiralProfile profile;
};
struct MapExpr::Pl {
    PLMap map;
};
struct MapExpr::Compose {
    std::vector<MapExpr> parts;
};
struct MapExpr::Inverse {
    MapExpr inner;
};
struct MapExpr::Node {
    std::variant<Identity, Affine, RadialExt, Psi, PhiTranslated, Product, Spiral, Pl, Compose, Inverse> v;
};

MapExpr make_map(MapExpr::Node node, int dim, std::optional<double> lambda);

/// f o g.
MapExpr compose(const MapExpr& f, const MapExpr& g);
MapExpr compose_all(std::vector<MapExpr> parts);
MapExpr inverse(const MapExpr& f);

MapExpr radial_extension(const SphereMap& phi);
MapExpr disk_replication(const DiskMap& g);
MapExpr translated_replication(std::vector<DiskMap> gs);
MapExpr translated_replication_uniform(const DiskMap& g);
MapExpr product_map(const MapExpr& f, const MapExpr& g);
MapExpr spiral_map(const SpiralProfile& p);
MapExpr pl_map(const PLMap& f);

/// Replication disks C_0 = D(0, 1), C_j = D(4^j e_1, 2^j) for j >= 1.
double replication_radius(int j) noexcept;
VectorN replication_center(int j, int dim);
/// rho_j(v) = c_j + 2^j v.
VectorN replication_rho(int j, const VectorN& v);
/// The unique j with v in C_j (closed disks are pairwise disjoint), if any.
std::optional<int> locate_replication_disk(const VectorN& v);

/// Central-difference Jacobian; default step 1e-5 max(1, |x|).
MatrixN jacobian_fd(const MapExpr& m, const VectorN& x, std::optional<double> h = std::nullopt);

}  // namespace qimaps
