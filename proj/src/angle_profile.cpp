#include "qimaps/angle_profile.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qimaps/error.hpp"

namespace qimaps {

namespace {

// Real roots of a + b u + c u^2 inside [lo, hi].
template <typename F>
void for_each_quadratic_root(double a, double b, double c, double lo, double hi, F&& f) {
    auto emit = [&](double u) {
        if (std::isfinite(u) && u >= lo && u <= hi) f(u);
    };
    if (c == 0.0) {
        if (b != 0.0) emit(-a / b);
        return;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    // Citardauq form avoids cancellation in the smaller root.
    const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
    emit(q / c);
    if (q != 0.0) emit(a / q);
}

}  // namespace

AngleProfile::AngleProfile(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw Error(Errc::invalid_argument, "angle profile needs at least two knots");
    if (knots_.front().r != 0.0) throw Error(Errc::invalid_argument, "angle profile must start at r = 0");
    for (const Knot& k : knots_) {
        if (!std::isfinite(k.r) || !std::isfinite(k.value) || !std::isfinite(k.slope)) {
            throw Error(Errc::invalid_argument, "angle profile knot not finite");
        }
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (!(knots_[i].r > knots_[i - 1].r)) {
            throw Error(Errc::invalid_argument, "angle profile knots must increase strictly");
        }
    }
    if (knots_.back().value != 0.0 || knots_.back().slope != 0.0) {
        throw Error(Errc::support_violation, "angle profile must vanish with zero slope at its last knot");
    }
    pieces_.reserve(knots_.size() - 1);
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        const Knot& a = knots_[i];
        const Knot& b = knots_[i + 1];
        const double h = b.r - a.r;
        const double secant = (b.value - a.value) / h;
        Piece p{};
        p.r0 = a.r;
        p.r1 = b.r;
        p.c0 = a.value;
        p.c1 = a.slope;
        p.c2 = (3.0 * secant - 2.0 * a.slope - b.slope) / h;
        p.c3 = (a.slope + b.slope - 2.0 * secant) / (h * h);
        pieces_.push_back(p);
    }
}

AngleProfile AngleProfile::smoothstep(double amplitude, double end) {
    if (!(end > 0.0)) throw Error(Errc::invalid_argument, "smoothstep end must be positive");
    return AngleProfile({{0.0, amplitude, 0.0}, {end, 0.0, 0.0}});
}

AngleProfile AngleProfile::zero(double end) { return smoothstep(0.0, end); }

double AngleProfile::operator()(double r) const noexcept {
    if (pieces_.empty() || r >= end()) return 0.0;
    if (r <= 0.0) return pieces_.front().c0;
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r,
                               [](double v, const Piece& p) { return v < p.r1; });
    const Piece& p = it == pieces_.end() ? pieces_.back() : *it;
    const double u = r - p.r0;
    return p.c0 + u * (p.c1 + u * (p.c2 + u * p.c3));
}

double AngleProfile::derivative(double r) const noexcept {
    if (pieces_.empty() || r >= end()) return 0.0;
    if (r <= 0.0) return pieces_.front().c1;
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), r,
                               [](double v, const Piece& p) { return v < p.r1; });
    const Piece& p = it == pieces_.end() ? pieces_.back() : *it;
    const double u = r - p.r0;
    return p.c1 + u * (2.0 * p.c2 + 3.0 * u * p.c3);
}

double AngleProfile::sup_abs_derivative() const noexcept {
    double best = 0.0;
    for (const Piece& p : pieces_) {
        const double h = p.r1 - p.r0;
        auto d = [&](double u) { return std::abs(p.c1 + u * (2.0 * p.c2 + 3.0 * u * p.c3)); };
        best = std::max({best, d(0.0), d(h)});
        if (p.c3 != 0.0) {
            const double u = -p.c2 / (3.0 * p.c3);
            if (u > 0.0 && u < h) best = std::max(best, d(u));
        }
    }
    return best;
}

double AngleProfile::sup_abs_r_derivative() const noexcept {
    double best = 0.0;
    for (const Piece& p : pieces_) {
        const double h = p.r1 - p.r0;
        // r theta'(r) with r = r0 + u is the cubic e0 + e1 u + e2 u^2 + e3 u^3.
        const double e0 = p.r0 * p.c1;
        const double e1 = p.c1 + 2.0 * p.c2 * p.r0;
        const double e2 = 2.0 * p.c2 + 3.0 * p.c3 * p.r0;
        const double e3 = 3.0 * p.c3;
        auto g = [&](double u) { return std::abs(e0 + u * (e1 + u * (e2 + u * e3))); };
        best = std::max({best, g(0.0), g(h)});
        for_each_quadratic_root(e1, 2.0 * e2, 3.0 * e3, 0.0, h, [&](double u) { best = std::max(best, g(u)); });
    }
    return best;
}

bool AngleProfile::is_zero() const noexcept {
    return std::all_of(knots_.begin(), knots_.end(),
                       [](const Knot& k) { return k.value == 0.0 && k.slope == 0.0; });
}

AngleProfile AngleProfile::negated() const {
    std::vector<Knot> k = knots_;
    for (Knot& x : k) {
        x.value = -x.value;
        x.slope = -x.slope;
    }
    return AngleProfile(std::move(k));
}

}  // namespace qimaps
