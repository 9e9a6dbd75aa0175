#include "qimaps/pl.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace qimaps {

namespace {

std::size_t factorial(int n) {
    std::size_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::size_t>(i);
    return f;
}

int perm_code(const std::array<int, kMaxPlDim>& p, int n) {
    int code = 0;
    for (int i = 0; i < n; ++i) code = code * n + p[static_cast<std::size_t>(i)];
    return code;
}

}  // namespace

// --- Triangulation -------------------------------------------------------------

Triangulation::Triangulation(int dim, double lo, double hi, int resolution)
    : dim_(dim), lo_(lo), hi_(hi), res_(resolution) {
    if (dim < 1 || dim > kMaxPlDim) {
        throw Error(Errc::invalid_argument, "Kuhn triangulation supports dimensions 1..6");
    }
    if (resolution <= 0) throw Error(Errc::empty_grid, "resolution must be at least 1");
    if (resolution > kMaxPlResolution) throw Error(Errc::invalid_argument, "resolution above 64");
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        throw Error(Errc::invalid_argument, "box must satisfy lo < hi");
    }
    step_ = (hi - lo) / resolution;
    vertex_count_ = 1;
    cube_count_ = 1;
    for (int i = 0; i < dim; ++i) {
        vertex_count_ *= static_cast<std::size_t>(resolution + 1);
        cube_count_ *= static_cast<std::size_t>(resolution);
    }
    perms_per_cube_ = factorial(dim);

    std::array<int, kMaxPlDim> p{};
    std::iota(p.begin(), p.begin() + dim, 0);
    int codes = 1;
    for (int i = 0; i < dim; ++i) codes *= dim;
    perm_rank_.assign(static_cast<std::size_t>(codes), -1);
    do {
        perm_rank_[static_cast<std::size_t>(perm_code(p, dim))] = static_cast<int>(perms_.size());
        perms_.push_back(p);
    } while (std::next_permutation(p.begin(), p.begin() + dim));
}

Triangulation kuhn_triangulation(int dim, double lo, double hi, int resolution) {
    return Triangulation(dim, lo, hi, resolution);
}

std::array<int, kMaxPlDim> Triangulation::vertex_lattice(std::size_t index) const {
    std::array<int, kMaxPlDim> l{};
    const auto base = static_cast<std::size_t>(res_ + 1);
    for (int i = 0; i < dim_; ++i) {
        l[static_cast<std::size_t>(i)] = static_cast<int>(index % base);
        index /= base;
    }
    return l;
}

std::size_t Triangulation::vertex_index(const std::array<int, kMaxPlDim>& lattice) const {
    std::size_t idx = 0;
    for (int i = dim_ - 1; i >= 0; --i) {
        idx = idx * static_cast<std::size_t>(res_ + 1) + static_cast<std::size_t>(lattice[static_cast<std::size_t>(i)]);
    }
    return idx;
}

VectorN Triangulation::vertex(std::size_t index) const {
    const auto l = vertex_lattice(index);
    VectorN v(dim_);
    for (int i = 0; i < dim_; ++i) {
        const int li = l[static_cast<std::size_t>(i)];
        // Exact endpoints so boundary vertices sit exactly on the box.
        v[i] = li == res_ ? hi_ : lo_ + step_ * li;
    }
    return v;
}

bool Triangulation::is_boundary_vertex(std::size_t index) const {
    const auto l = vertex_lattice(index);
    for (int i = 0; i < dim_; ++i) {
        const int li = l[static_cast<std::size_t>(i)];
        if (li == 0 || li == res_) return true;
    }
    return false;
}

std::array<int, kMaxPlDim> Triangulation::simplex_axes(std::size_t simplex) const {
    return perms_[simplex % perms_per_cube_];
}

std::array<int, kMaxPlDim> Triangulation::simplex_cube(std::size_t simplex) const {
    std::size_t cube = simplex / perms_per_cube_;
    std::array<int, kMaxPlDim> c{};
    for (int i = 0; i < dim_; ++i) {
        c[static_cast<std::size_t>(i)] = static_cast<int>(cube % static_cast<std::size_t>(res_));
        cube /= static_cast<std::size_t>(res_);
    }
    return c;
}

std::vector<std::size_t> Triangulation::simplex_vertices(std::size_t simplex) const {
    if (simplex >= simplex_count()) throw Error(Errc::invalid_argument, "simplex id out of range");
    auto lattice = simplex_cube(simplex);
    const auto axes = simplex_axes(simplex);
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(dim_ + 1));
    out.push_back(vertex_index(lattice));
    for (int t = 0; t < dim_; ++t) {
        ++lattice[static_cast<std::size_t>(axes[static_cast<std::size_t>(t)])];
        out.push_back(vertex_index(lattice));
    }
    return out;
}

double Triangulation::simplex_volume(std::size_t simplex) const {
    const auto verts = simplex_vertices(simplex);
    const VectorN v0 = vertex(verts[0]);
    MatrixN e(dim_);
    for (int t = 1; t <= dim_; ++t) e.set_column(t - 1, vertex(verts[static_cast<std::size_t>(t)]) - v0);
    return std::abs(determinant(e)) / static_cast<double>(perms_per_cube_);
}

bool Triangulation::contains(const VectorN& x) const {
    const double tol = 1e-12 * (hi_ - lo_);
    for (int i = 0; i < dim_; ++i) {
        if (!(x[i] >= lo_ - tol && x[i] <= hi_ + tol)) return false;
    }
    return true;
}

std::array<double, kMaxPlDim + 1> Triangulation::barycentric(std::size_t simplex, const VectorN& x) const {
    const auto cube = simplex_cube(simplex);
    const auto axes = simplex_axes(simplex);
    std::array<double, kMaxPlDim> t{};
    for (int i = 0; i < dim_; ++i) {
        t[static_cast<std::size_t>(i)] = (x[i] - lo_) / step_ - cube[static_cast<std::size_t>(i)];
    }
    std::array<double, kMaxPlDim + 1> b{};
    auto ta = [&](int k) { return t[static_cast<std::size_t>(axes[static_cast<std::size_t>(k)])]; };
    b[0] = 1.0 - ta(0);
    for (int k = 1; k < dim_; ++k) b[static_cast<std::size_t>(k)] = ta(k - 1) - ta(k);
    b[static_cast<std::size_t>(dim_)] = ta(dim_ - 1);
    return b;
}

Triangulation::Location Triangulation::locate(const VectorN& x) const {
    require_same_dim(x.dim(), dim_, "Triangulation::locate");
    if (!contains(x)) throw Error(Errc::out_of_domain, "point outside triangulated box");
    std::array<int, kMaxPlDim> cube{};
    std::array<double, kMaxPlDim> t{};
    std::size_t cube_linear = 0;
    std::size_t stride = 1;
    for (int i = 0; i < dim_; ++i) {
        double y = (x[i] - lo_) / step_;
        y = std::clamp(y, 0.0, static_cast<double>(res_));
        int c = static_cast<int>(std::floor(y));
        c = std::clamp(c, 0, res_ - 1);
        cube[static_cast<std::size_t>(i)] = c;
        t[static_cast<std::size_t>(i)] = std::clamp(y - c, 0.0, 1.0);
        cube_linear += stride * static_cast<std::size_t>(c);
        stride *= static_cast<std::size_t>(res_);
    }
    std::array<int, kMaxPlDim> axes{};
    std::iota(axes.begin(), axes.begin() + dim_, 0);
    // Descending local coordinate; equal values keep the smaller axis first.
    std::stable_sort(axes.begin(), axes.begin() + dim_, [&](int a, int b) {
        return t[static_cast<std::size_t>(a)] > t[static_cast<std::size_t>(b)];
    });
    const int rank = perm_rank_[static_cast<std::size_t>(perm_code(axes, dim_))];
    Location loc{};
    loc.simplex = cube_linear * perms_per_cube_ + static_cast<std::size_t>(rank);
    auto ta = [&](int k) { return t[static_cast<std::size_t>(axes[static_cast<std::size_t>(k)])]; };
    loc.barycentric[0] = 1.0 - ta(0);
    for (int k = 1; k < dim_; ++k) loc.barycentric[static_cast<std::size_t>(k)] = ta(k - 1) - ta(k);
    loc.barycentric[static_cast<std::size_t>(dim_)] = ta(dim_ - 1);
    return loc;
}

// --- PLMap ---------------------------------------------------------------------

PLMap::PLMap(Triangulation tri, std::vector<VectorN> vertex_images, bool boundary_fixed) {
    if (vertex_images.size() != tri.vertex_count()) {
        throw Error(Errc::dim_mismatch, "PL map needs one image per triangulation vertex");
    }
    for (const VectorN& v : vertex_images) {
        require_same_dim(v.dim(), tri.dim(), "PL vertex image");
        if (!v.all_finite()) throw Error(Errc::invalid_point, "PL vertex image not finite");
    }
    auto d = std::make_shared<Data>(Data{std::move(tri), std::move(vertex_images), boundary_fixed, {}, {}, 1, {}});
    build_buckets(*d);
    data_ = std::move(d);
}

PLMap PLMap::identity(const Triangulation& tri) {
    std::vector<VectorN> images;
    images.reserve(tri.vertex_count());
    for (std::size_t i = 0; i < tri.vertex_count(); ++i) images.push_back(tri.vertex(i));
    return PLMap(tri, std::move(images), true);
}

PLMap PLMap::affine(const Triangulation& tri, const MatrixN& m, const VectorN& b) {
    std::vector<VectorN> images;
    images.reserve(tri.vertex_count());
    for (std::size_t i = 0; i < tri.vertex_count(); ++i) images.push_back(m * tri.vertex(i) + b);
    return PLMap(tri, std::move(images), false);
}

void PLMap::build_buckets(Data& d) {
    const int n = d.tri.dim();
    d.bucket_lo = d.images.front();
    d.bucket_hi = d.images.front();
    for (const VectorN& w : d.images) {
        for (int i = 0; i < n; ++i) {
            d.bucket_lo[i] = std::min(d.bucket_lo[i], w[i]);
            d.bucket_hi[i] = std::max(d.bucket_hi[i], w[i]);
        }
    }
    d.bucket_res = d.tri.resolution();
    std::size_t cells = 1;
    for (int i = 0; i < n; ++i) cells *= static_cast<std::size_t>(d.bucket_res);
    d.buckets.assign(cells, {});
    auto cell_of = [&](int axis, double v) {
        const double w = d.bucket_hi[axis] - d.bucket_lo[axis];
        if (!(w > 0.0)) return 0;
        const int c = static_cast<int>(std::floor((v - d.bucket_lo[axis]) / w * d.bucket_res));
        return std::clamp(c, 0, d.bucket_res - 1);
    };
    for (std::size_t s = 0; s < d.tri.simplex_count(); ++s) {
        const auto verts = d.tri.simplex_vertices(s);
        std::array<int, kMaxPlDim> clo{}, chi{};
        for (int i = 0; i < n; ++i) {
            double mn = std::numeric_limits<double>::infinity();
            double mx = -mn;
            for (std::size_t v : verts) {
                mn = std::min(mn, d.images[v][i]);
                mx = std::max(mx, d.images[v][i]);
            }
            clo[static_cast<std::size_t>(i)] = cell_of(i, mn);
            chi[static_cast<std::size_t>(i)] = cell_of(i, mx);
        }
        std::array<int, kMaxPlDim> cur = clo;
        while (true) {
            std::size_t lin = 0;
            for (int i = n - 1; i >= 0; --i) {
                lin = lin * static_cast<std::size_t>(d.bucket_res) + static_cast<std::size_t>(cur[static_cast<std::size_t>(i)]);
            }
            d.buckets[lin].push_back(static_cast<std::uint32_t>(s));
            int axis = 0;
            while (axis < n) {
                auto a = static_cast<std::size_t>(axis);
                if (cur[a] < chi[a]) {
                    ++cur[a];
                    break;
                }
                cur[a] = clo[a];
                ++axis;
            }
            if (axis == n) break;
        }
    }
}

MatrixN PLMap::differential(std::size_t simplex) const {
    const Triangulation& tri = data_->tri;
    const auto verts = tri.simplex_vertices(simplex);
    const auto axes = tri.simplex_axes(simplex);
    MatrixN d(tri.dim());
    // Path edge t runs along axis pi(t) with length `step`.
    for (int t = 0; t < tri.dim(); ++t) {
        const VectorN col = (data_->images[verts[static_cast<std::size_t>(t + 1)]] -
                             data_->images[verts[static_cast<std::size_t>(t)]]) / tri.step();
        d.set_column(axes[static_cast<std::size_t>(t)], col);
    }
    return d;
}

VectorN PLMap::eval_in_simplex(std::size_t simplex, const VectorN& x) const {
    const auto verts = data_->tri.simplex_vertices(simplex);
    const auto b = data_->tri.barycentric(simplex, x);
    VectorN out(dim());
    for (std::size_t t = 0; t < verts.size(); ++t) out += data_->images[verts[t]] * b[t];
    return out;
}

VectorN PLMap::eval(const VectorN& x) const {
    require_same_dim(x.dim(), dim(), "pl_eval");
    if (!x.all_finite()) throw Error(Errc::invalid_point, "pl_eval: non-finite point");
    const Triangulation& tri = data_->tri;
    if (!tri.contains(x)) {
        if (data_->boundary_fixed) return x;
        throw Error(Errc::out_of_domain, "pl_eval: point outside the box of a map without fixed boundary");
    }
    const auto loc = tri.locate(x);
    const auto verts = tri.simplex_vertices(loc.simplex);
    VectorN out(dim());
    for (std::size_t t = 0; t < verts.size(); ++t) out += data_->images[verts[t]] * loc.barycentric[t];
    return out;
}

VectorN PLMap::eval_inverse(const VectorN& y) const {
    require_same_dim(y.dim(), dim(), "PLMap::eval_inverse");
    if (!y.all_finite()) throw Error(Errc::invalid_point, "PLMap::eval_inverse: non-finite point");
    const Data& d = *data_;
    const int n = dim();
    const double tol = 1e-12 * (d.tri.hi() - d.tri.lo());
    bool inside = true;
    for (int i = 0; i < n; ++i) {
        if (!(y[i] >= d.bucket_lo[i] - tol && y[i] <= d.bucket_hi[i] + tol)) inside = false;
    }
    if (!inside) {
        if (d.boundary_fixed) return y;
        throw Error(Errc::out_of_domain, "PLMap::eval_inverse: point outside the image");
    }
    std::size_t lin = 0;
    for (int i = n - 1; i >= 0; --i) {
        const double w = d.bucket_hi[i] - d.bucket_lo[i];
        int c = w > 0.0 ? static_cast<int>(std::floor((y[i] - d.bucket_lo[i]) / w * d.bucket_res)) : 0;
        c = std::clamp(c, 0, d.bucket_res - 1);
        lin = lin * static_cast<std::size_t>(d.bucket_res) + static_cast<std::size_t>(c);
    }
    double best_min = -std::numeric_limits<double>::infinity();
    VectorN best(n);
    for (std::uint32_t s : d.buckets[lin]) {
        const auto verts = d.tri.simplex_vertices(s);
        const VectorN& w0 = d.images[verts[0]];
        MatrixN e(n);
        for (int t = 1; t <= n; ++t) e.set_column(t - 1, d.images[verts[static_cast<std::size_t>(t)]] - w0);
        if (determinant(e) == 0.0) continue;
        const VectorN mu = inverse(e) * (y - w0);
        double sum = 0.0;
        double mn = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; ++t) {
            sum += mu[t];
            mn = std::min(mn, mu[t]);
        }
        mn = std::min(mn, 1.0 - sum);
        if (mn > best_min) {
            best_min = mn;
            VectorN x = d.tri.vertex(verts[0]) * (1.0 - sum);
            for (int t = 1; t <= n; ++t) x += d.tri.vertex(verts[static_cast<std::size_t>(t)]) * mu[t - 1];
            best = x;
        }
    }
    if (!(best_min >= -1e-9)) {
        throw Error(Errc::not_invertible, "PLMap::eval_inverse: no image simplex contains the point");
    }
    return best;
}

VectorN pl_eval(const PLMap& f, const VectorN& x) { return f.eval(x); }

// --- norms and validation --------------------------------------------------------

namespace {

enum class Orientation { positive, degenerate, negative };

Orientation orientation_of(const MatrixN& d) {
    const double det = determinant(d);
    const double scale = std::pow(std::max(frobenius_norm(d), 1e-300), d.dim());
    if (std::abs(det) <= 1e-12 * scale) return Orientation::degenerate;
    return det > 0.0 ? Orientation::positive : Orientation::negative;
}

}  // namespace

PLNorm pl_differential_norm(const PLMap& f) {
    PLNorm best{0.0, 0};
    const std::size_t count = f.triangulation().simplex_count();
    for (std::size_t s = 0; s < count; ++s) {
        const MatrixN d = f.differential(s);
        if (orientation_of(d) == Orientation::degenerate) {
            throw Error(Errc::degenerate_simplex, "simplex " + std::to_string(s) + " has a degenerate image");
        }
        const double nrm = operator_norm(d);
        if (nrm > best.norm) best = {nrm, s};
    }
    return best;
}

double pl_bilip_constant(const PLMap& f) {
    double lambda = 1.0;
    const std::size_t count = f.triangulation().simplex_count();
    for (std::size_t s = 0; s < count; ++s) {
        const MatrixN d = f.differential(s);
        if (orientation_of(d) != Orientation::positive) {
            throw Error(Errc::not_homeomorphism, "simplex " + std::to_string(s) + " is not positively oriented");
        }
        const double forward = operator_norm(d);
        const double backward = 1.0 / min_singular_value(d);
        lambda = std::max({lambda, forward, backward});
    }
    return lambda;
}

PLValidation pl_validate(const PLMap& f) {
    PLValidation report;
    const Triangulation& tri = f.triangulation();
    report.det_signs.resize(tri.simplex_count());
    for (std::size_t s = 0; s < tri.simplex_count(); ++s) {
        switch (orientation_of(f.differential(s))) {
            case Orientation::positive: report.det_signs[s] = 1; break;
            case Orientation::degenerate:
                report.det_signs[s] = 0;
                report.degenerate_simplices.push_back(s);
                break;
            case Orientation::negative:
                report.det_signs[s] = -1;
                report.negative_simplices.push_back(s);
                break;
        }
    }
    if (f.boundary_fixed()) {
        const double tol = 1e-12 * (tri.hi() - tri.lo());
        for (std::size_t v = 0; v < tri.vertex_count(); ++v) {
            if (tri.is_boundary_vertex(v) && distance(f.vertex_images()[v], tri.vertex(v)) > tol) {
                report.boundary_violations.push_back(v);
            }
        }
    }
    report.ok = report.negative_simplices.empty() && report.degenerate_simplices.empty() &&
                report.boundary_violations.empty();
    return report;
}

PLMap pl_twist_example(int dim, int resolution, double d) {
    if (dim < 2) throw Error(Errc::invalid_argument, "pl_twist_example needs dimension >= 2");
    if (!std::isfinite(d)) throw Error(Errc::invalid_argument, "displacement not finite");
    Triangulation tri(dim, -1.0, 1.0, resolution);
    std::vector<VectorN> images;
    images.reserve(tri.vertex_count());
    for (std::size_t i = 0; i < tri.vertex_count(); ++i) {
        const VectorN v = tri.vertex(i);
        if (tri.is_boundary_vertex(i) || d == 0.0) {
            images.push_back(v);
            continue;
        }
        double bump = 1.0;
        for (int k = 0; k < dim; ++k) bump *= 1.0 - v[k] * v[k];
        images.push_back(rotate_in_plane(v, 0, 1, d * bump));
    }
    PLMap f(std::move(tri), std::move(images), true);
    const PLValidation report = pl_validate(f);
    if (!report.ok) {
        throw Error(Errc::displacement_too_large,
                    "twist displacement " + std::to_string(d) + " flips " +
                        std::to_string(report.negative_simplices.size() + report.degenerate_simplices.size()) +
                        " simplices");
    }
    return f;
}

// --- CSV -------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t\r");
        const auto e = item.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    return out;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw Error(Errc::parse_error, "not a number: '" + s + "'");
    }
    if (pos != s.size()) throw Error(Errc::parse_error, "trailing characters in number: '" + s + "'");
    return v;
}

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        return true;
    }
    return false;
}

}  // namespace

void write_plmap_csv(std::ostream& out, const PLMap& f) {
    const Triangulation& tri = f.triangulation();
    out << "n,box_lo,box_hi,resolution,boundary_fixed\n";
    out << tri.dim() << ',' << fmt17(tri.lo()) << ',' << fmt17(tri.hi()) << ',' << tri.resolution() << ','
        << (f.boundary_fixed() ? 1 : 0) << '\n';
    out << "index";
    for (int i = 0; i < tri.dim(); ++i) out << ",y" << i;
    out << '\n';
    for (std::size_t v = 0; v < tri.vertex_count(); ++v) {
        out << v;
        for (int i = 0; i < tri.dim(); ++i) out << ',' << fmt17(f.vertex_images()[v][i]);
        out << '\n';
    }
}

PLMap read_plmap_csv(std::istream& in) {
    std::string line;
    if (!next_data_line(in, line) || split_csv(line).at(0) != "n") {
        throw Error(Errc::parse_error, "PL map CSV: missing header line");
    }
    if (!next_data_line(in, line)) throw Error(Errc::parse_error, "PL map CSV: missing header values");
    const auto head = split_csv(line);
    if (head.size() != 5) throw Error(Errc::parse_error, "PL map CSV: header needs 5 values");
    const int n = static_cast<int>(parse_double(head[0]));
    const double lo = parse_double(head[1]);
    const double hi = parse_double(head[2]);
    const int res = static_cast<int>(parse_double(head[3]));
    const bool fixed = parse_double(head[4]) != 0.0;
    Triangulation tri(n, lo, hi, res);
    if (!next_data_line(in, line) || split_csv(line).at(0) != "index") {
        throw Error(Errc::parse_error, "PL map CSV: missing vertex column header");
    }
    std::vector<VectorN> images(tri.vertex_count(), VectorN(n));
    std::vector<bool> seen(tri.vertex_count(), false);
    std::size_t rows = 0;
    while (next_data_line(in, line)) {
        const auto cells = split_csv(line);
        if (cells.size() != static_cast<std::size_t>(n + 1)) {
            throw Error(Errc::parse_error, "PL map CSV: row has wrong column count");
        }
        const double idx_d = parse_double(cells[0]);
        if (idx_d < 0 || idx_d >= static_cast<double>(tri.vertex_count()) || idx_d != std::floor(idx_d)) {
            throw Error(Errc::parse_error, "PL map CSV: vertex index out of range");
        }
        const auto idx = static_cast<std::size_t>(idx_d);
        if (seen[idx]) throw Error(Errc::parse_error, "PL map CSV: duplicate vertex index");
        seen[idx] = true;
        for (int i = 0; i < n; ++i) images[idx][i] = parse_double(cells[static_cast<std::size_t>(i + 1)]);
        ++rows;
    }
    if (rows != tri.vertex_count()) throw Error(Errc::parse_error, "PL map CSV: missing vertex rows");
    return PLMap(std::move(tri), std::move(images), fixed);
}

}  // namespace qimaps
