#include "tvcount/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace tvcount {

FunctionId FunctionId::parse(std::string_view name) {
    if (name == "mu") return {Kind::mu, 0};
    if (name == "dmu") return {Kind::mu_derivative, 0};
    if (name.size() >= 2 && (name[0] == 'a' || name[0] == 'b')) {
        int lag = 0;
        const auto* first = name.data() + 1;
        const auto* last = name.data() + name.size();
        auto [ptr, ec] = std::from_chars(first, last, lag);
        if (ec == std::errc() && ptr == last && lag >= 1) {
            return {name[0] == 'a' ? Kind::ar : Kind::ch, lag};
        }
    }
    throw std::invalid_argument("unknown function selector '" + std::string(name) + "'");
}

std::string FunctionId::name() const {
    switch (kind) {
    case Kind::mu: return "mu";
    case Kind::ar: return "a" + std::to_string(lag);
    case Kind::ch: return "b" + std::to_string(lag);
    case Kind::mu_derivative: return "dmu";
    }
    return "mu";
}

std::vector<FunctionId> available_functions(const ModelSpec& spec) {
    std::vector<FunctionId> out{{FunctionId::Kind::mu, 0}};
    for (int i = 1; i <= spec.p; ++i) out.push_back({FunctionId::Kind::ar, i});
    for (int k = 1; k <= spec.q; ++k) out.push_back({FunctionId::Kind::ch, k});
    out.push_back({FunctionId::Kind::mu_derivative, 0});
    return out;
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> default_grid(std::size_t T) { return rescaled_times(T); }

namespace {

void check_selector(const FunctionId& which, const ModelSpec& spec) {
    const bool ok = (which.kind == FunctionId::Kind::mu || which.kind == FunctionId::Kind::mu_derivative) ||
                    (which.kind == FunctionId::Kind::ar && which.lag >= 1 && which.lag <= spec.p) ||
                    (which.kind == FunctionId::Kind::ch && which.lag >= 1 && which.lag <= spec.q);
    if (!ok) throw std::invalid_argument("function '" + which.name() + "' does not exist for this model");
}

// Rows: draw-major values of one curve on the grid.
std::vector<double> evaluate_curve(const ModelSpec& spec, const ParamState& draw, const FunctionId& which,
                                   const std::vector<std::vector<double>>& rows) {
    std::vector<double> out(rows.size());
    switch (which.kind) {
    case FunctionId::Kind::mu:
    case FunctionId::Kind::mu_derivative:
        for (std::size_t g = 0; g < rows.size(); ++g) {
            double s = 0.0;
            for (std::size_t j = 0; j < spec.k1(); ++j) s += std::exp(draw.beta[j]) * rows[g][j];
            out[g] = s;
        }
        break;
    case FunctionId::Kind::ar: {
        const auto i = static_cast<std::size_t>(which.lag - 1);
        const double m = transform_weights(draw.delta)[i];
        for (std::size_t g = 0; g < rows.size(); ++g) {
            double s = 0.0;
            for (std::size_t j = 0; j < spec.k2(); ++j) s += draw.theta[i * spec.k2() + j] * rows[g][j];
            out[g] = m * s;
        }
        break;
    }
    case FunctionId::Kind::ch: {
        const auto k = static_cast<std::size_t>(which.lag - 1);
        const double m = transform_weights(draw.delta)[static_cast<std::size_t>(spec.p) + k];
        for (std::size_t g = 0; g < rows.size(); ++g) {
            double s = 0.0;
            for (std::size_t j = 0; j < spec.k3(); ++j) s += draw.eta[k * spec.k3() + j] * rows[g][j];
            out[g] = m * s;
        }
        break;
    }
    }
    return out;
}

} // namespace

FunctionSummary summarize_function(const FitResult& fit, const FunctionId& which, std::span<const double> grid) {
    if (fit.draws.empty()) throw std::invalid_argument("fit has no retained draws");
    const ModelSpec& spec = fit.spec;
    check_selector(which, spec);

    std::vector<std::vector<double>> rows(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        switch (which.kind) {
        case FunctionId::Kind::mu: rows[g] = spec.mu_basis.eval(grid[g]); break;
        case FunctionId::Kind::mu_derivative: rows[g] = spec.mu_basis.eval_derivative(grid[g], 1); break;
        case FunctionId::Kind::ar: rows[g] = spec.ar_basis.eval(grid[g]); break;
        case FunctionId::Kind::ch: rows[g] = spec.ch_basis.eval(grid[g]); break;
        }
    }

    const std::size_t n = fit.draws.size();
    std::vector<std::vector<double>> by_point(grid.size(), std::vector<double>(n));
    for (std::size_t d = 0; d < n; ++d) {
        const auto curve = evaluate_curve(spec, fit.draws[d], which, rows);
        for (std::size_t g = 0; g < grid.size(); ++g) by_point[g][d] = curve[g];
    }

    FunctionSummary s{which, std::vector<double>(grid.begin(), grid.end()), {}, {}, {}};
    s.mean.resize(grid.size());
    s.lower.resize(grid.size());
    s.upper.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto& v = by_point[g];
        double total = 0.0;
        for (double x : v) total += x;
        s.mean[g] = total / static_cast<double>(n);
        s.lower[g] = quantile(v, 0.025);
        s.upper[g] = quantile(v, 0.975);
        // Rounding in the mean can exceed a degenerate band by an ulp.
        s.mean[g] = std::clamp(s.mean[g], s.lower[g], s.upper[g]);
    }
    return s;
}

FunctionSummary summarize_derivative(const FitResult& fit, std::span<const double> grid) {
    return summarize_function(fit, {FunctionId::Kind::mu_derivative, 0}, grid);
}

std::vector<double> fitted_intensity(const FitResult& fit, const ModelSpec& spec, const CountSeries& series) {
    if (fit.draws.empty()) throw std::invalid_argument("fit has no retained draws");
    const ModelEvaluator evaluator(spec, series.size());
    std::vector<double> mean(series.size(), 0.0);
    for (const auto& draw : fit.draws) {
        const auto lambda = evaluator.intensity(draw, series);
        for (std::size_t t = 0; t < lambda.size(); ++t) mean[t] += lambda[t];
    }
    for (double& v : mean) v /= static_cast<double>(fit.draws.size());
    return mean;
}

double amse(const CountSeries& series, std::span<const double> lambda_hat) {
    if (series.size() != lambda_hat.size()) {
        throw std::invalid_argument("series and fitted intensity lengths differ");
    }
    if (series.size() == 0) throw std::invalid_argument("AMSE of an empty series");
    double total = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double r = static_cast<double>(series.values[t]) - lambda_hat[t];
        total += r * r;
    }
    return total / static_cast<double>(series.size());
}

} // namespace tvcount
