#include <benchmark/benchmark.h>

#include "tvcount/diagnostics.hpp"
#include "tvcount/inference.hpp"
#include "tvcount/posterior.hpp"
#include "tvcount/sampler.hpp"
#include "tvcount/simgen.hpp"

using namespace tvcount;

namespace {

ModelSpec bench_spec(int p, int q) {
    return q == 0 ? ModelSpec::ar(p, SplineBasis(3, 6)) : ModelSpec::ingarch(p, q, SplineBasis(3, 6));
}

CountSeries bench_series(const ModelSpec& spec, std::size_t T) {
    return simulate(generic_truth(spec), spec.kind, T, 11).series;
}

void BM_BasisEval(benchmark::State& state) {
    const SplineBasis basis(3, static_cast<int>(state.range(0)));
    std::vector<double> out(basis.size());
    double x = 0.0;
    for (auto _ : state) {
        basis.eval_into(x, out);
        benchmark::DoNotOptimize(out.data());
        x += 1e-3;
        if (x > 1.0) x = 0.0;
    }
}
BENCHMARK(BM_BasisEval)->Arg(6)->Arg(20);

void BM_LogPosterior(benchmark::State& state) {
    const auto spec = bench_spec(1, static_cast<int>(state.range(1)));
    const auto series = bench_series(spec, static_cast<std::size_t>(state.range(0)));
    const LogPosterior post(spec, series);
    Rng rng(1);
    const auto s = random_interior_state(spec, rng);
    for (auto _ : state) benchmark::DoNotOptimize(post.value(s));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LogPosterior)->Args({200, 0})->Args({1000, 0})->Args({1000, 1});

void BM_Gradient(benchmark::State& state) {
    const auto spec = bench_spec(1, static_cast<int>(state.range(1)));
    const auto series = bench_series(spec, static_cast<std::size_t>(state.range(0)));
    const LogPosterior post(spec, series);
    Rng rng(1);
    const auto s = random_interior_state(spec, rng);
    for (auto _ : state) benchmark::DoNotOptimize(post.gradient(s, false));
}
BENCHMARK(BM_Gradient)->Args({200, 0})->Args({1000, 0})->Args({1000, 1});

void BM_HmcTransition(benchmark::State& state) {
    const auto spec = bench_spec(1, 0);
    const auto series = bench_series(spec, 1000);
    const LogPosterior post(spec, series);
    SamplerConfig config;
    Rng rng(2);
    ChainState chain = initial_chain(post, config);
    const auto block = static_cast<Block>(state.range(0));
    for (auto _ : state) {
        chain = hmc_transition(chain, block, post, config, rng).chain;
        benchmark::DoNotOptimize(chain.log_post);
    }
    state.SetLabel(std::string(to_string(block)));
}
BENCHMARK(BM_HmcTransition)
    ->Arg(static_cast<int>(Block::beta))
    ->Arg(static_cast<int>(Block::delta))
    ->Arg(static_cast<int>(Block::coefficients))
    ->Unit(benchmark::kMillisecond);

void BM_FittedIntensity(benchmark::State& state) {
    const auto spec = bench_spec(1, 1);
    const auto series = bench_series(spec, 500);
    FitResult fit;
    fit.spec = spec;
    Rng rng(3);
    for (int d = 0; d < 100; ++d) fit.draws.push_back(random_interior_state(spec, rng));
    for (auto _ : state) benchmark::DoNotOptimize(fitted_intensity(fit, spec, series));
}
BENCHMARK(BM_FittedIntensity)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
