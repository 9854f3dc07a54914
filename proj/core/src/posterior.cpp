#include "tvcount/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tvcount {

GradientVector GradientVector::zeros(const ModelSpec& spec) {
    GradientVector g;
    g.beta.assign(spec.k1(), 0.0);
    g.theta.assign(static_cast<std::size_t>(spec.p) * spec.k2(), 0.0);
    g.eta.assign(static_cast<std::size_t>(spec.q) * spec.k3(), 0.0);
    g.delta.assign(spec.order() + 1, 0.0);
    return g;
}

std::vector<double> flatten(const GradientVector& grad, const ModelSpec& spec) {
    std::vector<double> out;
    out.insert(out.end(), grad.beta.begin(), grad.beta.end());
    out.insert(out.end(), grad.theta.begin(), grad.theta.end());
    out.insert(out.end(), grad.eta.begin(), grad.eta.end());
    out.insert(out.end(), grad.delta.begin(), grad.delta.end());
    if (spec.has_lambda0()) out.push_back(grad.lambda0);
    return out;
}

namespace {

bool in_support(const ParamState& state, const ModelSpec& spec) {
    auto in_box = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!std::all_of(state.theta.begin(), state.theta.end(), in_box)) return false;
    if (!std::all_of(state.eta.begin(), state.eta.end(), in_box)) return false;
    return !spec.has_lambda0() || state.lambda0 > 0.0;
}

void check_shape(const ParamState& state, const ModelSpec& spec) {
    if (state.beta.size() != spec.k1() || state.theta.size() != static_cast<std::size_t>(spec.p) * spec.k2() ||
        state.eta.size() != static_cast<std::size_t>(spec.q) * spec.k3() || state.delta.size() != spec.order() + 1) {
        throw std::invalid_argument("parameter state shape does not match model spec");
    }
}

double ch_lagged(const std::vector<double>& lambda, double lambda0, std::size_t t, std::size_t k) {
    if (k > t + 1) return 0.0;
    return k == t + 1 ? lambda0 : lambda[t - k];
}

} // namespace

LogPosterior::LogPosterior(const ModelSpec& spec, const CountSeries& series)
    : series_(series), evaluator_(spec, series.size()) {
    for (auto v : series_.values) {
        if (v < 0) throw std::invalid_argument("count series contains negative values");
    }
    first_ = spec.kind == ModelKind::ar ? std::min(static_cast<std::size_t>(spec.p), series_.size()) : 0;
}

double LogPosterior::log_likelihood(const ParamState& state) const {
    check_shape(state, spec());
    if (!in_support(state, spec())) return -std::numeric_limits<double>::infinity();
    const auto lambda = evaluator_.intensity(state, series_);
    double ll = 0.0;
    for (std::size_t t = first_; t < lambda.size(); ++t) {
        const auto x = static_cast<double>(series_.values[t]);
        ll += -lambda[t] + (x > 0.0 ? x * std::log(lambda[t]) : 0.0);
    }
    return ll;
}

double LogPosterior::log_prior(const ParamState& state) const {
    check_shape(state, spec());
    if (!in_support(state, spec())) return -std::numeric_limits<double>::infinity();
    const auto& h = spec().hyper;
    double lp = 0.0;
    for (double b : state.beta) lp -= b * b / (2.0 * h.c2);
    for (double d : state.delta) lp -= d * d / (2.0 * h.c1);
    if (spec().has_lambda0()) lp += -(h.d1 + 1.0) * std::log(state.lambda0) - h.d1 / state.lambda0;
    return lp;
}

double LogPosterior::value(const ParamState& state) const {
    const double lp = log_prior(state);
    if (!std::isfinite(lp)) return lp;
    return lp + log_likelihood(state);
}

double LogPosterior::lambda0_derivative(const ParamState& state) const {
    if (!spec().has_lambda0()) return 0.0;
    const double h = std::min(kLambda0RelativeStep * std::max(1.0, state.lambda0), 0.5 * state.lambda0);
    ParamState up = state;
    ParamState down = state;
    up.lambda0 += h;
    down.lambda0 -= h;
    return (value(up) - value(down)) / (up.lambda0 - down.lambda0);
}

GradientVector LogPosterior::gradient(const ParamState& state, bool with_lambda0) const {
    check_shape(state, spec());
    const ModelSpec& s = spec();
    const auto T = series_.size();
    const auto p = static_cast<std::size_t>(s.p);
    const auto q = static_cast<std::size_t>(s.q);
    const auto k1 = s.k1();
    const auto k2 = s.k2();
    const auto k3 = s.k3();

    GradientVector g = GradientVector::zeros(s);
    const auto& h = s.hyper;
    for (std::size_t j = 0; j < k1; ++j) g.beta[j] = -state.beta[j] / h.c2;
    for (std::size_t l = 0; l <= p + q; ++l) g.delta[l] = -state.delta[l] / h.c1;
    if (T == 0) {
        if (with_lambda0) g.lambda0 = lambda0_derivative(state);
        return g;
    }

    const auto paths = evaluator_.coefficient_paths(state);
    const auto lambda = evaluator_.intensity(state, series_, paths);

    // Adjoint r_t = dℓ/dλ_t including the effect of λ_t on later intensities.
    std::vector<double> r(T, 0.0);
    for (std::size_t tt = T; tt-- > 0;) {
        double acc = 0.0;
        if (tt >= first_) acc = static_cast<double>(series_.values[tt]) / lambda[tt] - 1.0;
        for (std::size_t k = 1; k <= q && tt + k < T; ++k) acc += paths.ch[k - 1][tt + k] * r[tt + k];
        r[tt] = acc;
    }

    std::vector<double> exp_beta(k1);
    std::transform(state.beta.begin(), state.beta.end(), exp_beta.begin(), [](double b) { return std::exp(b); });
    // Sensitivity of ℓ to each softmax weight M_1..M_{p+q}.
    std::vector<double> g_weight(p + q, 0.0);

    for (std::size_t t = 0; t < T; ++t) {
        const double rt = r[t];
        if (rt == 0.0) continue;
        const auto mu_row = evaluator_.mu_design().row(t);
        for (std::size_t j = 0; j < k1; ++j) g.beta[j] += rt * exp_beta[j] * mu_row[j];

        const auto ar_row = evaluator_.ar_design().row(t);
        for (std::size_t i = 1; i <= p && i <= t; ++i) {
            const double x_lag = static_cast<double>(series_.values[t - i]);
            if (x_lag == 0.0) continue;
            const double c = rt * x_lag;
            double* gt = g.theta.data() + (i - 1) * k2;
            for (std::size_t j = 0; j < k2; ++j) gt[j] += c * paths.weights[i - 1] * ar_row[j];
            g_weight[i - 1] += c * paths.ar_profile[i - 1][t];
        }

        const auto ch_row = evaluator_.ch_design().row(t);
        for (std::size_t k = 1; k <= q; ++k) {
            const double l_lag = ch_lagged(lambda, state.lambda0, t, k);
            if (l_lag == 0.0) continue;
            const double c = rt * l_lag;
            double* ge = g.eta.data() + (k - 1) * k3;
            for (std::size_t j = 0; j < k3; ++j) ge[j] += c * paths.weights[p + k - 1] * ch_row[j];
            g_weight[p + k - 1] += c * paths.ch_profile[k - 1][t];
        }
    }

    // dM_i/dδ_l = M_i (1{i=l} - M_l), with M_0 the slack weight.
    double weighted = 0.0;
    for (std::size_t i = 0; i < p + q; ++i) weighted += paths.weights[i] * g_weight[i];
    double slack = 1.0;
    for (double m : paths.weights) slack -= m;
    g.delta[0] += -slack * weighted;
    for (std::size_t l = 1; l <= p + q; ++l) {
        const double m = paths.weights[l - 1];
        g.delta[l] += m * g_weight[l - 1] - m * weighted;
    }

    if (with_lambda0) g.lambda0 = lambda0_derivative(state);
    return g;
}

double log_posterior(const ParamState& state, const ModelSpec& spec, const CountSeries& series) {
    return LogPosterior(spec, series).value(state);
}

GradientVector grad_log_posterior(const ParamState& state, const ModelSpec& spec, const CountSeries& series) {
    return LogPosterior(spec, series).gradient(state);
}

FiniteDiffResult finite_diff_grad(const LogPosterior& posterior, const ParamState& state, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    const ModelSpec& spec = posterior.spec();
    const ParamLayout layout(spec);
    auto coords = flatten(state, spec);
    std::vector<double> grad(coords.size());
    bool clipped = false;

    for (std::size_t c = 0; c < coords.size(); ++c) {
        const double x0 = coords[c];
        double lo = x0 - h;
        double hi = x0 + h;
        if (c >= layout.theta && c < layout.delta) {
            if (lo < 0.0 || hi > 1.0) clipped = true;
            lo = std::max(lo, 0.0);
            hi = std::min(hi, 1.0);
        } else if (spec.has_lambda0() && c == layout.lambda0 && lo <= 0.0) {
            clipped = true;
            lo = 0.5 * x0;
        }
        coords[c] = hi;
        const double up = posterior.value(unflatten(coords, spec));
        coords[c] = lo;
        const double down = posterior.value(unflatten(coords, spec));
        coords[c] = x0;
        grad[c] = (up - down) / (hi - lo);
    }

    FiniteDiffResult result;
    const ParamState shaped = unflatten(grad, spec);
    result.gradient.beta = shaped.beta;
    result.gradient.theta = shaped.theta;
    result.gradient.eta = shaped.eta;
    result.gradient.delta = shaped.delta;
    result.gradient.lambda0 = spec.has_lambda0() ? shaped.lambda0 : 0.0;
    result.clipped = clipped;
    return result;
}

FiniteDiffResult finite_diff_grad(const ParamState& state, const ModelSpec& spec, const CountSeries& series,
                                  double h) {
    return finite_diff_grad(LogPosterior(spec, series), state, h);
}

double max_relative_error(const GradientVector& a, const GradientVector& b, const ModelSpec& spec) {
    const auto fa = flatten(a, spec);
    const auto fb = flatten(b, spec);
    double worst = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        const double scale = std::max({std::abs(fa[i]), std::abs(fb[i]), 1.0});
        worst = std::max(worst, std::abs(fa[i] - fb[i]) / scale);
    }
    return worst;
}

} // namespace tvcount
