#include "tvcount/spline_basis.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tvcount {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

} // namespace

SplineBasis::SplineBasis(int degree, int knot_count) : degree_(degree), knot_count_(knot_count) {
    if (degree < 0) {
        throw std::invalid_argument("spline degree must be non-negative, got " + std::to_string(degree));
    }
    if (knot_count < 2) {
        throw std::invalid_argument("need at least 2 knots to span [0,1], got " + std::to_string(knot_count));
    }
    const auto d = static_cast<std::size_t>(degree);
    const auto n = static_cast<std::size_t>(knot_count);
    knots_.reserve(n + 2 * d);
    knots_.insert(knots_.end(), d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        knots_.push_back(static_cast<double>(i) / static_cast<double>(n - 1));
    }
    knots_.back() = 1.0;
    knots_.insert(knots_.end(), d, 1.0);
    size_ = knots_.size() - d - 1;
}

std::size_t SplineBasis::find_span(double x) const {
    // Half-open spans [t_s, t_{s+1}); x = 1 belongs to the last non-empty span.
    const auto last = knots_.size() - static_cast<std::size_t>(degree_) - 2;
    if (x >= 1.0) return last;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    return std::min(static_cast<std::size_t>(it - knots_.begin()) - 1, last);
}

void SplineBasis::sweep(double x, int degree, std::span<double> out) const {
    const std::size_t m = knots_.size();
    std::vector<double> n(m - 1, 0.0);
    n[find_span(x)] = 1.0;
    for (int k = 1; k <= degree; ++k) {
        const std::size_t count = m - static_cast<std::size_t>(k) - 1;
        for (std::size_t i = 0; i < count; ++i) {
            const double left = safe_ratio(x - knots_[i], knots_[i + k] - knots_[i]);
            const double right = safe_ratio(knots_[i + k + 1] - x, knots_[i + k + 1] - knots_[i + 1]);
            n[i] = left * n[i] + right * n[i + 1];
        }
    }
    std::copy_n(n.begin(), out.size(), out.begin());
}

void SplineBasis::eval_into(double x, std::span<double> out) const {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::out_of_range("basis evaluation point outside [0,1]: " + std::to_string(x));
    }
    if (out.size() != size_) throw std::invalid_argument("basis output span has wrong size");
    sweep(x, degree_, out);
}

std::vector<double> SplineBasis::eval(double x) const {
    std::vector<double> out(size_);
    eval_into(x, out);
    return out;
}

std::vector<double> SplineBasis::eval_derivative(double x, int order) const {
    if (order < 1) throw std::invalid_argument("derivative order must be positive");
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::out_of_range("basis evaluation point outside [0,1]: " + std::to_string(x));
    }
    if (order > degree_) return std::vector<double>(size_, 0.0);

    const std::size_t m = knots_.size();
    const int base = degree_ - order;
    std::vector<double> d(m - static_cast<std::size_t>(base) - 1);
    sweep(x, base, d);
    // d/dx B_{i,k} = k (B_{i,k-1} / (t_{i+k} - t_i) - B_{i+1,k-1} / (t_{i+k+1} - t_{i+1}))
    for (int k = base + 1; k <= degree_; ++k) {
        const std::size_t count = m - static_cast<std::size_t>(k) - 1;
        for (std::size_t i = 0; i < count; ++i) {
            d[i] = k * (safe_ratio(d[i], knots_[i + k] - knots_[i]) -
                        safe_ratio(d[i + 1], knots_[i + k + 1] - knots_[i + 1]));
        }
    }
    d.resize(size_);
    return d;
}

SplineBasis build_basis(int degree, int knot_count) { return SplineBasis(degree, knot_count); }

} // namespace tvcount
