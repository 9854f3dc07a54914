#include "tvcount/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tvcount {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::ar ? "ar" : "ingarch"; }

ModelKind parse_model_kind(std::string_view name) {
    if (name == "ar" || name == "tvbarc") return ModelKind::ar;
    if (name == "ingarch" || name == "tvbingarch") return ModelKind::ingarch;
    throw std::invalid_argument("unknown model kind '" + std::string(name) + "' (expected ar or ingarch)");
}

void CountSeries::validate() const {
    if (values.empty()) throw std::invalid_argument("count series is empty");
    if (!labels.empty() && labels.size() != values.size()) {
        throw std::invalid_argument("count series has " + std::to_string(labels.size()) + " labels for " +
                                    std::to_string(values.size()) + " values");
    }
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (values[t] < 0) throw std::invalid_argument("negative count at position " + std::to_string(t + 1));
    }
}

ModelSpec ModelSpec::ar(int p, const SplineBasis& basis, Hyperparameters hyper) {
    ModelSpec spec{ModelKind::ar, p, 0, basis, basis, basis, hyper};
    spec.validate();
    return spec;
}

ModelSpec ModelSpec::ingarch(int p, int q, const SplineBasis& basis, Hyperparameters hyper) {
    ModelSpec spec{ModelKind::ingarch, p, q, basis, basis, basis, hyper};
    spec.validate();
    return spec;
}

void ModelSpec::validate() const {
    if (p < 0 || q < 0) throw std::invalid_argument("lag orders must be non-negative");
    if (kind == ModelKind::ar && q != 0) throw std::invalid_argument("AR model must have q = 0");
    if (!(hyper.c1 > 0.0) || !(hyper.c2 > 0.0) || !(hyper.d1 > 0.0)) {
        throw std::invalid_argument("hyperparameters c1, c2, d1 must be positive");
    }
}

ParamState ParamState::zeros(const ModelSpec& spec) {
    ParamState s;
    s.beta.assign(spec.k1(), 0.0);
    s.theta.assign(static_cast<std::size_t>(spec.p) * spec.k2(), 0.0);
    s.eta.assign(static_cast<std::size_t>(spec.q) * spec.k3(), 0.0);
    s.delta.assign(spec.order() + 1, 0.0);
    s.lambda0 = 1.0;
    return s;
}

bool ParamState::satisfies_invariants(const ModelSpec& spec) const {
    if (beta.size() != spec.k1() || theta.size() != static_cast<std::size_t>(spec.p) * spec.k2() ||
        eta.size() != static_cast<std::size_t>(spec.q) * spec.k3() || delta.size() != spec.order() + 1) {
        return false;
    }
    auto finite = [](double v) { return std::isfinite(v); };
    auto in_box = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!std::all_of(beta.begin(), beta.end(), finite) || !std::all_of(delta.begin(), delta.end(), finite)) {
        return false;
    }
    if (!std::all_of(theta.begin(), theta.end(), in_box) || !std::all_of(eta.begin(), eta.end(), in_box)) {
        return false;
    }
    return !spec.has_lambda0() || (std::isfinite(lambda0) && lambda0 > 0.0);
}

ParamLayout::ParamLayout(const ModelSpec& spec) {
    beta = 0;
    theta = beta + spec.k1();
    eta = theta + static_cast<std::size_t>(spec.p) * spec.k2();
    delta = eta + static_cast<std::size_t>(spec.q) * spec.k3();
    lambda0 = delta + spec.order() + 1;
    total = lambda0 + (spec.has_lambda0() ? 1 : 0);
}

std::vector<double> flatten(const ParamState& state, const ModelSpec& spec) {
    std::vector<double> out;
    out.reserve(ParamLayout(spec).total);
    out.insert(out.end(), state.beta.begin(), state.beta.end());
    out.insert(out.end(), state.theta.begin(), state.theta.end());
    out.insert(out.end(), state.eta.begin(), state.eta.end());
    out.insert(out.end(), state.delta.begin(), state.delta.end());
    if (spec.has_lambda0()) out.push_back(state.lambda0);
    return out;
}

ParamState unflatten(std::span<const double> coords, const ModelSpec& spec) {
    const ParamLayout layout(spec);
    if (coords.size() != layout.total) {
        throw std::invalid_argument("coordinate vector has " + std::to_string(coords.size()) +
                                    " entries, model expects " + std::to_string(layout.total));
    }
    ParamState s;
    s.beta.assign(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(layout.theta));
    s.theta.assign(coords.begin() + static_cast<std::ptrdiff_t>(layout.theta),
                   coords.begin() + static_cast<std::ptrdiff_t>(layout.eta));
    s.eta.assign(coords.begin() + static_cast<std::ptrdiff_t>(layout.eta),
                 coords.begin() + static_cast<std::ptrdiff_t>(layout.delta));
    s.delta.assign(coords.begin() + static_cast<std::ptrdiff_t>(layout.delta),
                   coords.begin() + static_cast<std::ptrdiff_t>(layout.lambda0));
    s.lambda0 = spec.has_lambda0() ? coords[layout.lambda0] : 1.0;
    return s;
}

std::vector<std::string> coordinate_names(const ModelSpec& spec) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < spec.k1(); ++j) names.push_back("beta_" + std::to_string(j + 1));
    for (int i = 0; i < spec.p; ++i) {
        for (std::size_t j = 0; j < spec.k2(); ++j) {
            names.push_back("theta_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
        }
    }
    for (int k = 0; k < spec.q; ++k) {
        for (std::size_t j = 0; j < spec.k3(); ++j) {
            names.push_back("eta_" + std::to_string(k + 1) + "_" + std::to_string(j + 1));
        }
    }
    for (std::size_t l = 0; l <= spec.order(); ++l) names.push_back("delta_" + std::to_string(l));
    if (spec.has_lambda0()) names.emplace_back("lambda0");
    return names;
}

std::vector<double> transform_weights(std::span<const double> delta) {
    if (delta.empty()) throw std::invalid_argument("delta must contain at least the slack coordinate");
    if (!std::all_of(delta.begin(), delta.end(), [](double v) { return std::isfinite(v); })) {
        throw std::invalid_argument("delta contains non-finite values");
    }
    const double shift = *std::max_element(delta.begin(), delta.end());
    std::vector<double> e(delta.size());
    std::transform(delta.begin(), delta.end(), e.begin(), [shift](double d) { return std::exp(d - shift); });
    const double total = std::accumulate(e.begin(), e.end(), 0.0);
    std::vector<double> weights(delta.size() - 1);
    for (std::size_t i = 1; i < e.size(); ++i) weights[i - 1] = e[i] / total;
    return weights;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double mu_from_row(std::span<const double> beta, std::span<const double> row) {
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] != 0.0) s += std::exp(beta[j]) * row[j];
    }
    return s;
}

} // namespace

double eval_mu(const ParamState& state, const ModelSpec& spec, double x) {
    return mu_from_row(state.beta, spec.mu_basis.eval(x));
}

double eval_ar_coef(const ParamState& state, const ModelSpec& spec, int lag, double x) {
    if (lag < 1 || lag > spec.p) throw std::out_of_range("AR lag " + std::to_string(lag) + " outside 1.." + std::to_string(spec.p));
    const auto weights = transform_weights(state.delta);
    const auto i = static_cast<std::size_t>(lag - 1);
    const std::span<const double> theta(state.theta.data() + i * spec.k2(), spec.k2());
    return weights[i] * dot(theta, spec.ar_basis.eval(x));
}

double eval_ch_coef(const ParamState& state, const ModelSpec& spec, int lag, double x) {
    if (lag < 1 || lag > spec.q) throw std::out_of_range("CH lag " + std::to_string(lag) + " outside 1.." + std::to_string(spec.q));
    const auto weights = transform_weights(state.delta);
    const auto k = static_cast<std::size_t>(lag - 1);
    const std::span<const double> eta(state.eta.data() + k * spec.k3(), spec.k3());
    return weights[static_cast<std::size_t>(spec.p) + k] * dot(eta, spec.ch_basis.eval(x));
}

BasisDesign::BasisDesign(const SplineBasis& basis, std::span<const double> grid)
    : rows_(grid.size()), cols_(basis.size()), values_(grid.size() * basis.size()) {
    for (std::size_t r = 0; r < rows_; ++r) {
        basis.eval_into(grid[r], std::span<double>(values_.data() + r * cols_, cols_));
    }
}

std::vector<double> rescaled_times(std::size_t T) {
    std::vector<double> x(T);
    for (std::size_t t = 1; t <= T; ++t) x[t - 1] = static_cast<double>(t) / static_cast<double>(T);
    return x;
}

ModelEvaluator::ModelEvaluator(const ModelSpec& spec, std::size_t T)
    : spec_(spec),
      T_(T),
      mu_design_(spec.mu_basis, rescaled_times(T)),
      ar_design_(spec.ar_basis, rescaled_times(T)),
      ch_design_(spec.ch_basis, rescaled_times(T)) {
    spec_.validate();
}

CoefficientPaths ModelEvaluator::coefficient_paths(const ParamState& state) const {
    const auto p = static_cast<std::size_t>(spec_.p);
    const auto q = static_cast<std::size_t>(spec_.q);
    CoefficientPaths paths;
    paths.weights = transform_weights(state.delta);
    paths.mu.resize(T_);

    std::vector<double> exp_beta(state.beta.size());
    std::transform(state.beta.begin(), state.beta.end(), exp_beta.begin(), [](double b) { return std::exp(b); });
    for (std::size_t t = 0; t < T_; ++t) paths.mu[t] = dot(exp_beta, mu_design_.row(t));

    paths.ar.assign(p, std::vector<double>(T_));
    paths.ar_profile.assign(p, std::vector<double>(T_));
    for (std::size_t i = 0; i < p; ++i) {
        const std::span<const double> theta(state.theta.data() + i * spec_.k2(), spec_.k2());
        for (std::size_t t = 0; t < T_; ++t) {
            paths.ar_profile[i][t] = dot(theta, ar_design_.row(t));
            paths.ar[i][t] = paths.weights[i] * paths.ar_profile[i][t];
        }
    }
    paths.ch.assign(q, std::vector<double>(T_));
    paths.ch_profile.assign(q, std::vector<double>(T_));
    for (std::size_t k = 0; k < q; ++k) {
        const std::span<const double> eta(state.eta.data() + k * spec_.k3(), spec_.k3());
        for (std::size_t t = 0; t < T_; ++t) {
            paths.ch_profile[k][t] = dot(eta, ch_design_.row(t));
            paths.ch[k][t] = paths.weights[p + k] * paths.ch_profile[k][t];
        }
    }
    return paths;
}

std::vector<double> ModelEvaluator::intensity(const ParamState& state, const CountSeries& series,
                                              const CoefficientPaths& paths) const {
    if (series.size() != T_) throw std::invalid_argument("series length does not match evaluator length");
    const auto p = static_cast<std::size_t>(spec_.p);
    const auto q = static_cast<std::size_t>(spec_.q);
    std::vector<double> lambda(T_);
    // Index t is time t+1; X and lambda at time s live at index s-1.
    for (std::size_t t = 0; t < T_; ++t) {
        double l = paths.mu[t];
        for (std::size_t i = 1; i <= p && i <= t; ++i) {
            l += paths.ar[i - 1][t] * static_cast<double>(series.values[t - i]);
        }
        for (std::size_t k = 1; k <= q && k <= t + 1; ++k) {
            const double past = (k == t + 1) ? state.lambda0 : lambda[t - k];
            l += paths.ch[k - 1][t] * past;
        }
        lambda[t] = l;
    }
    return lambda;
}

std::vector<double> ModelEvaluator::intensity(const ParamState& state, const CountSeries& series) const {
    return intensity(state, series, coefficient_paths(state));
}

std::vector<double> intensity_path(const ParamState& state, const ModelSpec& spec, const CountSeries& series) {
    return ModelEvaluator(spec, series.size()).intensity(state, series);
}

ConstraintReport check_constraints(const ParamState& state, const ModelSpec& spec, std::size_t grid_size) {
    if (grid_size < 2) throw std::invalid_argument("constraint grid needs at least 2 points");
    const auto weights = transform_weights(state.delta);
    const auto p = static_cast<std::size_t>(spec.p);
    const auto q = static_cast<std::size_t>(spec.q);
    // 1 - sum(a + b) = M_0 + sum_i M_i (1 - theta_i)'B + sum_k M_k (1 - eta_k)'B since the basis sums
    // to one. Every term is non-negative, so the margin survives M_0 far below machine epsilon.
    const double shift = *std::max_element(state.delta.begin(), state.delta.end());
    double total = 0.0;
    for (double d : state.delta) total += std::exp(d - shift);
    const double m0 = std::exp(state.delta[0] - shift) / total;
    auto deficit = [](std::span<const double> coef, std::span<const double> row) {
        double v = 0.0;
        for (std::size_t j = 0; j < coef.size(); ++j) v += (1.0 - coef[j]) * row[j];
        return v;
    };

    ConstraintReport report;
    report.max_coef_sum = -std::numeric_limits<double>::infinity();
    report.min_mu = std::numeric_limits<double>::infinity();
    report.min_coef = std::numeric_limits<double>::infinity();
    report.min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double x = static_cast<double>(g) / static_cast<double>(grid_size - 1);
        report.min_mu = std::min(report.min_mu, mu_from_row(state.beta, spec.mu_basis.eval(x)));
        double sum = 0.0;
        double slack = m0;
        const auto ar_row = spec.ar_basis.eval(x);
        for (std::size_t i = 0; i < p; ++i) {
            const std::span<const double> theta(state.theta.data() + i * spec.k2(), spec.k2());
            const double a = weights[i] * dot(theta, ar_row);
            report.min_coef = std::min(report.min_coef, a);
            sum += a;
            slack += weights[i] * deficit(theta, ar_row);
        }
        const auto ch_row = spec.ch_basis.eval(x);
        for (std::size_t k = 0; k < q; ++k) {
            const std::span<const double> eta(state.eta.data() + k * spec.k3(), spec.k3());
            const double b = weights[p + k] * dot(eta, ch_row);
            report.min_coef = std::min(report.min_coef, b);
            sum += b;
            slack += weights[p + k] * deficit(eta, ch_row);
        }
        report.max_coef_sum = std::max(report.max_coef_sum, sum);
        report.min_slack = std::min(report.min_slack, slack);
    }
    if (p + q == 0) report.min_coef = 0.0;
    report.pass = report.min_mu > 0.0 && report.min_coef >= 0.0 && report.min_slack > 0.0;
    return report;
}

} // namespace tvcount
