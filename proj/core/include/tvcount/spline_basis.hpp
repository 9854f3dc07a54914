#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tvcount {

/// Clamped B-spline basis on [0,1] with equidistant knots.
///
/// The knot vector repeats 0 and 1 `degree + 1` times, so the first basis
/// function interpolates x = 0 and the last interpolates x = 1. Evaluation
/// uses the bottom-up Cox-de Boor sweep, which is exact at the knots.
/// Instances are immutable after construction.
class SplineBasis {
public:
    /// `knot_count` distinct equidistant knots, endpoints included.
    /// Gives `knot_count + degree - 1` basis functions.
    SplineBasis(int degree, int knot_count);

    int degree() const noexcept { return degree_; }
    int knot_count() const noexcept { return knot_count_; }
    std::size_t size() const noexcept { return size_; }
    std::span<const double> knots() const noexcept { return knots_; }

    /// Values of all basis functions at x in [0,1]. Throws std::out_of_range otherwise.
    std::vector<double> eval(double x) const;
    void eval_into(double x, std::span<double> out) const;

    /// d^order/dx^order of every basis function at x. Zero vector when order > degree.
    std::vector<double> eval_derivative(double x, int order) const;

private:
    // Index s with knots_[s] <= x < knots_[s+1], clamped to the last non-empty span.
    std::size_t find_span(double x) const;
    // Cox-de Boor sweep up to `degree` over the full knot vector; `out` has
    // knots_.size() - degree - 1 entries.
    void sweep(double x, int degree, std::span<double> out) const;

    int degree_;
    int knot_count_;
    std::size_t size_;
    std::vector<double> knots_;
};

SplineBasis build_basis(int degree, int knot_count);

} // namespace tvcount
