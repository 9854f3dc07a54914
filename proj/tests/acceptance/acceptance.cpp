// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "stats.hpp"
#include "temp_dir.hpp"
#include "tvcount/diagnostics.hpp"
#include "tvcount/inference.hpp"
#include "tvcount/io.hpp"
#include "tvcount/simgen.hpp"

using namespace tvcount;

namespace {

constexpr std::uint64_t kSeriesSeed = 1;
constexpr std::uint64_t kChainSeed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Simulates `preset_name`, writes it to `dir`, and fits it through the CLI pipeline.
struct SimFit {
    SimulatedSeries sim;
    cli::FitOutcome outcome;
    double seconds = 0.0;
};

SimFit simulate_and_fit(const std::string& preset_name, std::size_t T, const std::filesystem::path& dir,
                        const std::string& out_name) {
    const auto truth = preset(preset_name);
    SimFit r;
    r.sim = simulate(truth, truth.kind(), T, kSeriesSeed);
    const auto input = dir / (preset_name + "_" + std::to_string(T) + ".csv");
    write_series_csv(input, r.sim.series, preset_name);

    cli::RunConfig config;
    config.model = std::string(to_string(truth.kind()));
    config.p = static_cast<int>(truth.ar.size());
    config.q = static_cast<int>(truth.ch.size());
    config.sampler.seed = kChainSeed;
    config.input = input.string();
    config.output_dir = (dir / out_name).string();
    std::ostringstream log;
    const auto start = std::chrono::steady_clock::now();
    r.outcome = cli::run_fit(config, log);
    r.seconds = seconds_since(start);
    return r;
}

double coverage(const FunctionSummary& s, const std::function<double(double)>& truth) {
    std::size_t inside = 0;
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
        const double v = truth(s.grid[g]);
        if (s.lower[g] <= v && v <= s.upper[g]) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(s.grid.size());
}

Outcome within_tolerance(double value, double reference, double tol) {
    const double rel = std::abs(value - reference) / reference;
    return {rel <= tol, fmt("AMSE %.3f vs reference %.2f (%+.1f%%)", value, reference, 100.0 * (value - reference) / reference)};
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* title, const Outcome& o) {
        std::printf("%s  %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };
    tvcount::testing::TempDir dir;

    // 1. Gradient correctness.
    {
        const auto start = std::chrono::steady_clock::now();
        double worst = 0.0;
        std::size_t states = 0;
        for (const auto& spec : {ModelSpec::ar(1, SplineBasis(3, 6)), ModelSpec::ar(2, SplineBasis(3, 6)),
                                 ModelSpec::ingarch(1, 1, SplineBasis(3, 6))}) {
            const auto r = gradient_check(spec, 3, 50, 200, 20240601);
            worst = std::max(worst, r.max_relative_error);
            states += r.states_checked;
        }
        const double secs = seconds_since(start);
        report(1, "gradient vs central differences", {worst < 1e-5 && secs < 60.0,
               fmt("max relative error %.2e over %zu states in %.1f s", worst, states, secs)});
    }

    // 3 and 5. TVBARC(1) recovery and sampler tuning.
    const auto ar = simulate_and_fit("ar1", 1000, dir.path(), "ar1_fit");
    {
        const auto truth = preset("ar1");
        const auto grid = default_grid(1000);
        const double cov_mu = coverage(summarize_function(ar.outcome.fit, FunctionId::parse("mu"), grid), truth.mu);
        const double cov_a1 = coverage(summarize_function(ar.outcome.fit, FunctionId::parse("a1"), grid), truth.ar[0]);
        auto o = within_tolerance(ar.outcome.amse, 7.02, 0.25);
        o.pass = o.pass && cov_mu >= 0.8 && cov_a1 >= 0.8;
        o.detail += fmt("; band coverage mu %.1f%%, a1 %.1f%%; %.0f s", 100 * cov_mu, 100 * cov_a1, ar.seconds);
        report(3, "TVBARC(1) recovery, T=1000", o);
    }

    // 4. TVBINGARCH(1,1) recovery.
    const auto ing200 = simulate_and_fit("ingarch11", 200, dir.path(), "ing200_fit");
    const auto ing100 = simulate_and_fit("ingarch11", 100, dir.path(), "ing100_fit");
    {
        const auto a = within_tolerance(ing200.outcome.amse, 27.84, 0.25);
        const auto b = within_tolerance(ing100.outcome.amse, 30.24, 0.25);
        report(4, "TVBINGARCH(1,1) recovery, T=200 and T=100",
               {a.pass && b.pass, "T=200 " + a.detail + "; T=100 " + b.detail});
    }

    {
        Outcome o{true, ""};
        for (const auto& b : ar.outcome.fit.blocks) {
            o.pass = o.pass && b.acceptance_rate >= 0.5 && b.acceptance_rate <= 0.9;
            o.detail += fmt("%s%s %.3f", o.detail.empty() ? "" : ", ", std::string(to_string(b.block)).c_str(),
                            b.acceptance_rate);
        }
        report(5, "post burn-in acceptance in [0.5, 0.9]", o);
    }

    // 2. Constraints on every retained draw of every fit above.
    {
        std::size_t draws = 0, violations = 0;
        double worst_sum = 0.0, worst_mu = std::numeric_limits<double>::infinity();
        double worst_slack = std::numeric_limits<double>::infinity();
        for (const auto* f : {&ar, &ing200, &ing100}) {
            for (const auto& d : f->outcome.fit.draws) {
                const auto c = check_constraints(d, f->outcome.fit.spec, 1001);
                ++draws;
                violations += c.pass ? 0 : 1;
                worst_sum = std::max(worst_sum, c.max_coef_sum);
                worst_mu = std::min(worst_mu, c.min_mu);
                worst_slack = std::min(worst_slack, c.min_slack);
            }
        }
        report(2, "constraints on retained draws", {violations == 0,
               fmt("%zu violations in %zu draws; sup coefficient sum %.4f (min 1 - sum %.3g), min mu %.4g", violations,
                   draws, worst_sum, worst_slack, worst_mu)});
    }

    // 6. Byte-identical draws for a repeated (config, seed).
    {
        const auto again = simulate_and_fit("ingarch11", 100, dir.path(), "ing100_again");
        const auto first = tvcount::testing::slurp(dir / "ing100_fit" / "draws.csv");
        const auto second = tvcount::testing::slurp(dir / "ing100_again" / "draws.csv");
        report(6, "reproducible draws.csv", {!first.empty() && first == second,
               fmt("%zu bytes, %s", first.size(), first == second ? "identical" : "different")});
    }

    // 7. Spline kernel.
    {
        const SplineBasis basis(3, 6);
        double pou = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            double s = 0.0;
            for (double v : basis.eval(i / 1000.0)) s += v;
            pou = std::max(pou, std::abs(s - 1.0));
        }
        Rng rng(77);
        const double h = 1e-6;
        double deriv = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double x = h + (1.0 - 2.0 * h) * uniform01(rng);
            const auto d = basis.eval_derivative(x, 1);
            const auto up = basis.eval(x + h), down = basis.eval(x - h);
            for (std::size_t j = 0; j < d.size(); ++j) deriv = std::max(deriv, std::abs(d[j] - (up[j] - down[j]) / (2 * h)));
        }
        report(7, "spline partition of unity and derivative", {pou < 1e-12 && deriv < 1e-6,
               fmt("partition error %.1e, derivative error %.1e", pou, deriv)});
    }

    // 8. HMC on a standard Gaussian.
    {
        HmcTarget target;
        target.log_density = [](std::span<const double> q) { return -0.5 * q[0] * q[0]; };
        target.gradient = [](std::span<const double> q, std::span<double> g) { g[0] = -q[0]; };
        const std::vector<Interval> free{{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}};
        Rng rng(kChainSeed);
        std::vector<double> q{0.0}, draws;
        double lp = 0.0;
        for (int i = 0; i < 5000; ++i) {
            const auto s = hmc_step(q, lp, target, 0.05, SamplerConfig{}.n_leapfrog, free, BoundaryMode::none, rng);
            q = s.position;
            lp = s.log_density;
            draws.push_back(q[0]);
        }
        const double ks = teststats::ks_distance(draws, teststats::normal_cdf);
        report(8, "HMC standard Gaussian", {ks < 0.05, fmt("KS distance %.4f over 5000 draws", ks)});
    }

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
