#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvcount/model.hpp"
#include "tvcount/sampler.hpp"

namespace tvcount {

/// Which curve a summary describes: mu, a_i, b_k or d mu / dx.
struct FunctionId {
    enum class Kind { mu, ar, ch, mu_derivative };
    Kind kind = Kind::mu;
    int lag = 0; // 1-based for ar / ch

    /// "mu", "a<i>", "b<k>", "dmu".
    static FunctionId parse(std::string_view name);
    std::string name() const;
};

/// Every function available for `spec`: mu, a1..ap, b1..bq, dmu.
std::vector<FunctionId> available_functions(const ModelSpec& spec);

struct FunctionSummary {
    FunctionId which;
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> lower; // 2.5% pointwise quantile
    std::vector<double> upper; // 97.5% pointwise quantile
};

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);

/// Grid t/T for t = 1..T.
std::vector<double> default_grid(std::size_t T);

/// Pointwise posterior mean and 95% band of the selected curve over the retained draws.
FunctionSummary summarize_function(const FitResult& fit, const FunctionId& which, std::span<const double> grid);
/// Same for d mu / dx = sum_j exp(beta_j) B_j'(x).
FunctionSummary summarize_derivative(const FitResult& fit, std::span<const double> grid);

/// Posterior mean over draws of the per-draw intensity path.
std::vector<double> fitted_intensity(const FitResult& fit, const ModelSpec& spec, const CountSeries& series);

/// (1/T) sum_t (X_t - lambda_hat_t)^2.
double amse(const CountSeries& series, std::span<const double> lambda_hat);

} // namespace tvcount
