#include "tvcount/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tvcount/rng.hpp"

namespace tvcount {

namespace {

Curve bump(double height) {
    return [height](double x) { return height * std::exp(-(x - 0.5) * (x - 0.5) / 0.1); };
}

double ar_lag1(double x) { return 0.3 * (x - 1.0) * (x - 1.0) + 0.1; }
double rising_quadratic(double x) { return 0.4 * x * x + 0.1; }
double sine_bump(double x) { return 0.1 * std::sin(std::numbers::pi * x) + 0.2; }

} // namespace

bool TrueFunctions::satisfies_constraints(std::size_t grid_size) const {
    if (!mu || grid_size < 2) return false;
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double x = static_cast<double>(g) / static_cast<double>(grid_size - 1);
        if (!(mu(x) > 0.0)) return false;
        double sum = 0.0;
        for (const auto& f : ar) {
            const double v = f(x);
            if (!(v >= 0.0)) return false;
            sum += v;
        }
        for (const auto& f : ch) {
            const double v = f(x);
            if (!(v >= 0.0)) return false;
            sum += v;
        }
        if (!(sum < 1.0)) return false;
    }
    return true;
}

TrueFunctions preset(std::string_view name) {
    if (name == "ar1") return {"ar1", bump(10.0), {ar_lag1}, {}};
    if (name == "ar2") return {"ar2", bump(10.0), {ar_lag1, rising_quadratic}, {}};
    if (name == "ingarch11") return {"ingarch11", bump(25.0), {rising_quadratic}, {sine_bump}};
    throw std::invalid_argument("unknown simulation preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"ar1", "ar2", "ingarch11"}; }

SimulatedSeries simulate(const TrueFunctions& truth, ModelKind kind, std::size_t T, std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("simulation length must be at least 1");
    if (kind == ModelKind::ar && !truth.ch.empty()) {
        throw std::invalid_argument("AR simulation given feedback (CH) curves");
    }
    if (!truth.satisfies_constraints()) {
        throw std::invalid_argument("true functions violate positivity/stability constraints");
    }

    Rng rng(seed);
    SimulatedSeries out;
    out.series.values.resize(T);
    out.lambda.resize(T);
    const auto p = truth.ar.size();
    const auto q = truth.ch.size();
    for (std::size_t t = 0; t < T; ++t) {
        const double x = static_cast<double>(t + 1) / static_cast<double>(T);
        double l = truth.mu(x);
        for (std::size_t i = 1; i <= p && i <= t; ++i) {
            l += truth.ar[i - 1](x) * static_cast<double>(out.series.values[t - i]);
        }
        for (std::size_t k = 1; k <= q && k <= t; ++k) l += truth.ch[k - 1](x) * out.lambda[t - k];
        out.lambda[t] = l;
        out.series.values[t] = poisson(rng, l);
    }
    return out;
}

} // namespace tvcount
