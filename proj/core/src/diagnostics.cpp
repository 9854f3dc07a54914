#include "tvcount/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tvcount/posterior.hpp"

namespace tvcount {

ParamState random_interior_state(const ModelSpec& spec, Rng& rng) {
    ParamState s = ParamState::zeros(spec);
    for (auto& b : s.beta) b = std::log(5.0) + 0.5 * standard_normal(rng);
    for (auto& t : s.theta) t = 0.05 + 0.9 * uniform01(rng);
    for (auto& e : s.eta) e = 0.05 + 0.9 * uniform01(rng);
    for (auto& d : s.delta) d = standard_normal(rng);
    s.lambda0 = 1.0 + 19.0 * uniform01(rng);
    return s;
}

TrueFunctions generic_truth(const ModelSpec& spec) {
    TrueFunctions truth;
    truth.name = "generic";
    truth.mu = [](double x) { return 10.0 * std::exp(-(x - 0.5) * (x - 0.5) / 0.1) + 1.0; };
    const double ar_share = spec.q > 0 ? 0.4 : 0.6;
    for (int i = 1; i <= spec.p; ++i) {
        const double scale = ar_share / spec.p;
        truth.ar.emplace_back([scale](double x) { return scale * (0.6 + 0.4 * x * x); });
    }
    for (int k = 1; k <= spec.q; ++k) {
        const double scale = 0.3 / spec.q;
        truth.ch.emplace_back([scale](double x) { return scale * (0.6 + 0.4 * std::sin(std::numbers::pi * x)); });
    }
    return truth;
}

GradientCheckReport gradient_check(const ModelSpec& spec, std::size_t n_series, std::size_t n_states,
                                   std::size_t T, std::uint64_t seed, double h) {
    Rng rng(seed);
    const TrueFunctions truth = generic_truth(spec);
    GradientCheckReport report;
    for (std::size_t s = 0; s < n_series; ++s) {
        const auto sim = simulate(truth, spec.kind, T, seed + 1000 * (s + 1));
        const LogPosterior posterior(spec, sim.series);
        for (std::size_t i = 0; i < n_states; ++i) {
            const ParamState state = random_interior_state(spec, rng);
            const auto analytic = posterior.gradient(state);
            const auto numeric = finite_diff_grad(posterior, state, h);
            report.max_relative_error =
                std::max(report.max_relative_error, max_relative_error(analytic, numeric.gradient, spec));
            report.clipped += numeric.clipped ? 1 : 0;
            ++report.states_checked;
        }
    }
    return report;
}

} // namespace tvcount
