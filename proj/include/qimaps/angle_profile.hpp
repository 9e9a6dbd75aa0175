#pragma once

#include <vector>

namespace qimaps {

/// C^1 piecewise-cubic Hermite angle function on [0, end], identically zero
/// beyond `end`. Knots must start at 0, increase strictly, and the last knot
/// must carry value 0 and slope 0 so the zero extension stays C^1.
class AngleProfile {
public:
    struct Knot {
        double r;
        double value;
        double slope;
    };

    AngleProfile() = default;
    /// Throws support_violation if the last knot does not vanish to first order,
    /// invalid_argument for malformed knots.
    explicit AngleProfile(std::vector<Knot> knots);

    /// theta(r) = amplitude * (1 - 3 (r/end)^2 + 2 (r/end)^3): smoothstep bump.
    static AngleProfile smoothstep(double amplitude, double end = 1.0);
    static AngleProfile zero(double end = 1.0);

    double operator()(double r) const noexcept;
    double derivative(double r) const noexcept;
    double end() const noexcept { return knots_.empty() ? 0.0 : knots_.back().r; }
    const std::vector<Knot>& knots() const noexcept { return knots_; }

    /// sup_r |theta'(r)| from closed-form extrema of each quadratic piece.
    double sup_abs_derivative() const noexcept;
    /// sup_r |r theta'(r)| from closed-form extrema of each cubic piece.
    double sup_abs_r_derivative() const noexcept;
    bool is_zero() const noexcept;
    AngleProfile negated() const;

private:
    // Coefficients of theta(r_k + u) = c0 + c1 u + c2 u^2 + c3 u^3 on piece k.
    struct Piece {
        double r0, r1, c0, c1, c2, c3;
    };
    std::vector<Knot> knots_;
    std::vector<Piece> pieces_;
};

}  // namespace qimaps
