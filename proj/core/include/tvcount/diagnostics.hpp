#pragma once

#include <cstddef>
#include <cstdint>

#include "tvcount/model.hpp"
#include "tvcount/rng.hpp"
#include "tvcount/simgen.hpp"

namespace tvcount {

/// Random state strictly inside the parameter box: theta, eta in [0.05, 0.95],
/// beta around log 5, delta standard normal, lambda0 in [1, 20].
ParamState random_interior_state(const ModelSpec& spec, Rng& rng);

/// Smooth truth with the orders of `spec` (bump-shaped mu, slowly varying lags)
/// used to produce test series for arbitrary p, q.
TrueFunctions generic_truth(const ModelSpec& spec);

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::size_t states_checked = 0;
    std::size_t clipped = 0; // finite-difference evaluations that touched the box edge
};

/// Analytic gradient against central differences with step `h` for
/// `n_states` random interior states on each of `n_series` simulated series.
GradientCheckReport gradient_check(const ModelSpec& spec, std::size_t n_series, std::size_t n_states,
                                   std::size_t T, std::uint64_t seed, double h = 1e-5);

} // namespace tvcount
