#pragma once

#include <cstddef>
#include <vector>

#include "tvcount/model.hpp"

namespace tvcount {

/// Partial derivatives of the log posterior, shaped like ParamState.
struct GradientVector {
    std::vector<double> beta;
    std::vector<double> theta;
    std::vector<double> eta;
    std::vector<double> delta;
    double lambda0 = 0.0;

    static GradientVector zeros(const ModelSpec& spec);
};

std::vector<double> flatten(const GradientVector& grad, const ModelSpec& spec);

/// Central-difference step for the lambda0 coordinate, relative to its magnitude.
inline constexpr double kLambda0RelativeStep = 1e-5;

/// Log posterior of a TVBARC / TVBINGARCH model for a fixed series.
///
/// The Poisson log-likelihood drops log(X_t!) terms. For AR(p) the sum runs
/// over t = p+1..T (conditioning on the first p counts); for INGARCH over
/// t = 1..T. Priors: beta ~ N(0, c2), delta ~ N(0, c1), theta and eta
/// uniform on [0,1], lambda0 ~ InvGamma(d1, d1). Outside the theta/eta box
/// or for lambda0 <= 0 the value is -inf.
///
/// Gradients are analytic for beta, theta, eta and delta. The INGARCH
/// recursion is differentiated exactly by a backward (adjoint) sweep
///   r_t = w_t + sum_k b_k(t+k / T) r_{t+k},   w_t = X_t / lambda_t - 1,
/// so every direct sensitivity d lambda_t / d phi is weighted by r_t.
/// d/d lambda0 is a central finite difference.
class LogPosterior {
public:
    LogPosterior(const ModelSpec& spec, const CountSeries& series);

    const ModelSpec& spec() const noexcept { return evaluator_.spec(); }
    const CountSeries& series() const noexcept { return series_; }
    const ModelEvaluator& evaluator() const noexcept { return evaluator_; }
    /// First 0-based time index included in the likelihood sum.
    std::size_t first_index() const noexcept { return first_; }

    double value(const ParamState& state) const;
    double log_likelihood(const ParamState& state) const;
    double log_prior(const ParamState& state) const;

    /// When `with_lambda0` is false the lambda0 entry is left at 0 (saves two evaluations).
    GradientVector gradient(const ParamState& state, bool with_lambda0 = true) const;
    double lambda0_derivative(const ParamState& state) const;

private:
    CountSeries series_;
    ModelEvaluator evaluator_;
    std::size_t first_;
};

double log_posterior(const ParamState& state, const ModelSpec& spec, const CountSeries& series);
GradientVector grad_log_posterior(const ParamState& state, const ModelSpec& spec, const CountSeries& series);

struct FiniteDiffResult {
    GradientVector gradient;
    bool clipped = false; // some theta/eta/lambda0 perturbation hit a boundary and was shortened
};

/// Coordinate-wise central differences of the log posterior with step h.
/// Box-constrained perturbations are clipped into [0,1] and the quotient uses the actual span.
FiniteDiffResult finite_diff_grad(const LogPosterior& posterior, const ParamState& state, double h);
FiniteDiffResult finite_diff_grad(const ParamState& state, const ModelSpec& spec, const CountSeries& series,
                                  double h);

/// |a - b| / max(|a|, |b|, 1), maximised over coordinates.
double max_relative_error(const GradientVector& a, const GradientVector& b, const ModelSpec& spec);

} // namespace tvcount
