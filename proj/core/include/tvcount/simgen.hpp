#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tvcount/model.hpp"

namespace tvcount {

using Curve = std::function<double(double)>;

/// Ground-truth coefficient curves on [0,1].
struct TrueFunctions {
    std::string name;
    Curve mu;
    std::vector<Curve> ar; // a_{0,1} .. a_{0,p}
    std::vector<Curve> ch; // b_{0,1} .. b_{0,q}

    ModelKind kind() const noexcept { return ch.empty() ? ModelKind::ar : ModelKind::ingarch; }
    /// mu > 0, a, b >= 0 and sup sum(a) + sum(b) < 1 on an equidistant grid.
    bool satisfies_constraints(std::size_t grid_size = 1001) const;
};

/// "ar1", "ar2" (TVBARC designs) and "ingarch11" (TVBINGARCH design).
TrueFunctions preset(std::string_view name);
std::vector<std::string> preset_names();

struct SimulatedSeries {
    CountSeries series;
    std::vector<double> lambda; // true intensity path
};

/// Draws X_t ~ Poisson(lambda_t) with the model recursion at x = t/T and zero
/// pre-sample counts and intensities. Throws std::invalid_argument when the
/// truth violates the constraints or disagrees with `kind`.
SimulatedSeries simulate(const TrueFunctions& truth, ModelKind kind, std::size_t T, std::uint64_t seed);

} // namespace tvcount
