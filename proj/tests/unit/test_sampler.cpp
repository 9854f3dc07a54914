#include "tvcount/sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "stats.hpp"
#include "tvcount/simgen.hpp"

using namespace tvcount;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

HmcTarget gaussian_target(std::vector<double> sd) {
    HmcTarget t;
    t.log_density = [sd](std::span<const double> q) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s -= 0.5 * q[i] * q[i] / (sd[i] * sd[i]);
        return s;
    };
    t.gradient = [sd](std::span<const double> q, std::span<double> g) {
        for (std::size_t i = 0; i < q.size(); ++i) g[i] = -q[i] / (sd[i] * sd[i]);
    };
    return t;
}

std::vector<std::vector<double>> run_kernel(const HmcTarget& target, std::vector<double> q, std::size_t n,
                                            double step, int leapfrog, std::vector<Interval> bounds, BoundaryMode mode,
                                            std::uint64_t seed) {
    Rng rng(seed);
    double lp = target.log_density(q);
    std::vector<std::vector<double>> draws(q.size());
    for (std::size_t i = 0; i < n; ++i) {
        auto s = hmc_step(q, lp, target, step, leapfrog, bounds, mode, rng);
        q = s.position;
        lp = s.log_density;
        for (std::size_t c = 0; c < q.size(); ++c) draws[c].push_back(q[c]);
    }
    return draws;
}

CountSeries short_ar_series() { return simulate(preset("ar1"), ModelKind::ar, 120, 3).series; }

} // namespace

TEST(HmcStep, FlatTargetConservesEnergy) {
    HmcTarget flat;
    flat.log_density = [](std::span<const double>) { return 0.0; };
    flat.gradient = [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
    Rng rng(1);
    const std::vector<double> q{0.5, -1.0, 2.0};
    const std::vector<Interval> free(3, Interval{-kInf, kInf});
    for (int n = 0; n < 20; ++n) {
        const auto s = hmc_step(q, 0.0, flat, 0.1, 30, free, BoundaryMode::none, rng);
        EXPECT_EQ(s.accept_prob, 1.0);
        EXPECT_TRUE(s.accepted);
    }
}

TEST(HmcStep, StandardGaussianMoments) {
    const auto draws =
        run_kernel(gaussian_target({1.0}), {0.0}, 5000, 0.1, 15, {Interval{-kInf, kInf}}, BoundaryMode::none, 42);
    EXPECT_NEAR(teststats::mean(draws[0]), 0.0, 0.1);
    EXPECT_NEAR(teststats::variance(draws[0]), 1.0, 0.15);
}

TEST(HmcStep, TwoDimensionalGaussianKolmogorovSmirnov) {
    const std::vector<double> sd{1.0, 2.0};
    const auto draws = run_kernel(gaussian_target(sd), {0.0, 0.0}, 5000, 0.15, 15,
                                  {Interval{-kInf, kInf}, Interval{-kInf, kInf}}, BoundaryMode::none, 7);
    for (std::size_t c = 0; c < 2; ++c) {
        const double s = sd[c];
        EXPECT_LT(teststats::ks_distance(draws[c], [s](double x) { return teststats::normal_cdf(x / s); }), 0.05);
    }
}

TEST(HmcStep, ReflectionPreservesTruncatedTarget) {
    // N(0.3, 0.5^2) truncated to [0,1].
    const double m = 0.3, s = 0.5;
    HmcTarget t;
    t.log_density = [&](std::span<const double> q) { return -0.5 * (q[0] - m) * (q[0] - m) / (s * s); };
    t.gradient = [&](std::span<const double> q, std::span<double> g) { g[0] = -(q[0] - m) / (s * s); };
    const auto draws = run_kernel(t, {0.5}, 5000, 0.05, 10, {Interval{0.0, 1.0}}, BoundaryMode::reflect, 19);
    const double lo = teststats::normal_cdf((0.0 - m) / s), hi = teststats::normal_cdf((1.0 - m) / s);
    const auto cdf = [&](double x) { return (teststats::normal_cdf((x - m) / s) - lo) / (hi - lo); };
    EXPECT_LT(teststats::ks_distance(draws[0], cdf), 0.05);
    for (double x : draws[0]) ASSERT_TRUE(x >= 0.0 && x <= 1.0);
}

TEST(HmcStep, NonFiniteEnergyRejects) {
    HmcTarget t = gaussian_target({1.0});
    t.log_density = [](std::span<const double>) { return -kInf; };
    Rng rng(2);
    const std::vector<double> q{0.3};
    const auto s = hmc_step(q, 0.0, t, 0.1, 5, std::vector<Interval>{{-kInf, kInf}}, BoundaryMode::none, rng);
    EXPECT_FALSE(s.accepted);
    EXPECT_EQ(s.position, q);
}

TEST(BoundaryMap, ClampToNearestBoundary) {
    std::vector<double> q{1.2, -0.3, 0.4};
    std::vector<double> p{1.0, -1.0, 0.5};
    const std::vector<Interval> box(3, Interval{0.0, 1.0});
    apply_boundary(q, p, box, BoundaryMode::clamp);
    EXPECT_EQ(q, (std::vector<double>{1.0, 0.0, 0.4}));
    EXPECT_EQ(p, (std::vector<double>{1.0, -1.0, 0.5}));
}

TEST(BoundaryMap, ClampTiming) {
    // Linear log density pushing upwards: trajectories from 0.9 leave the box.
    double max_seen = 0.0;
    HmcTarget t;
    t.log_density = [](std::span<const double> q) { return 5.0 * q[0]; };
    t.gradient = [&](std::span<const double> q, std::span<double> g) {
        max_seen = std::max(max_seen, q[0]);
        g[0] = 5.0;
    };
    const std::vector<Interval> box{{0.0, 1.0}};
    for (BoundaryMode mode : {BoundaryMode::clamp, BoundaryMode::clamp_each_step}) {
        max_seen = 0.0;
        Rng rng(3);
        std::vector<double> q{0.9};
        for (int i = 0; i < 20; ++i) {
            const auto s = hmc_step(q, t.log_density(q), t, 0.05, 30, box, mode, rng);
            ASSERT_GE(s.position[0], 0.0);
            ASSERT_LE(s.position[0], 1.0);
        }
        if (mode == BoundaryMode::clamp) {
            EXPECT_GT(max_seen, 1.0);
        } else {
            EXPECT_LE(max_seen, 1.0);
        }
    }
}

TEST(BoundaryMap, ReflectFlipsMomentum) {
    std::vector<double> q{1.2, -0.3};
    std::vector<double> p{1.0, -1.0};
    const std::vector<Interval> box(2, Interval{0.0, 1.0});
    apply_boundary(q, p, box, BoundaryMode::reflect);
    EXPECT_NEAR(q[0], 0.8, 1e-15);
    EXPECT_NEAR(q[1], 0.3, 1e-15);
    EXPECT_EQ(p, (std::vector<double>{-1.0, 1.0}));
}

TEST(AdaptStepSize, WindowRule) {
    const SamplerConfig c;
    EXPECT_EQ(adapt_step_size(0.05, 0.7, c), 0.05);
    EXPECT_LT(adapt_step_size(0.05, 0.3, c), 0.05);
    EXPECT_GT(adapt_step_size(0.05, 0.95, c), 0.05);
    EXPECT_DOUBLE_EQ(adapt_step_size(0.05, 0.3, c), 0.05 * 0.8);
    EXPECT_DOUBLE_EQ(adapt_step_size(0.05, 0.95, c), 0.05 * 1.25);
}

TEST(AdaptStepSize, UpdateRecordsWindowStep) {
    const SamplerConfig c;
    const std::vector<Block> blocks{Block::beta, Block::delta};
    ChainState chain;
    chain.step_size.fill(0.1);
    chain.window[static_cast<std::size_t>(Block::beta)] = {95, 100};
    chain.window[static_cast<std::size_t>(Block::delta)] = {30, 100};
    const auto events = adapt_step_sizes(chain, blocks, c);
    EXPECT_DOUBLE_EQ(chain.step_size[static_cast<std::size_t>(Block::beta)], 0.125);
    EXPECT_DOUBLE_EQ(chain.step_size[static_cast<std::size_t>(Block::delta)], 0.08);
    ASSERT_EQ(events.size(), 2u);
    EXPECT_EQ(events[0].window_step, 0.1);
    EXPECT_DOUBLE_EQ(events[0].step_size, 0.125);
    EXPECT_EQ(events[1].acceptance, 0.3);
    EXPECT_EQ(chain.window[static_cast<std::size_t>(Block::beta)].proposed, 0u);
}

TEST(FrozenStepSize, PoolsLateWindowsByStep) {
    const SamplerConfig c;
    const Block d = Block::delta;
    // Means: 0.2 -> 0.825, 0.3 -> 0.71, 0.4 -> 0.5; the beta and early windows are ignored.
    const std::vector<AdaptationEvent> events{
        {100, d, 0.70, 0.5, 0.5},  {200, Block::beta, 0.70, 0.9, 0.9},
        {300, d, 0.95, 0.2, 0.25}, {400, d, 0.70, 0.2, 0.2},
        {500, d, 0.60, 0.3, 0.3},  {600, d, 0.82, 0.3, 0.375},
        {700, d, 0.50, 0.4, 0.32}, {800, d, 0.65, 0.2, 0.2},
        {900, d, 0.71, 0.3, 0.3}, {1000, d, 1.00, 0.2, 0.25},
    };
    EXPECT_EQ(frozen_step_size(events, d, 200, c, 7.0), 0.3);
    EXPECT_EQ(frozen_step_size(events, Block::beta, 200, c, 7.0), 7.0);
    EXPECT_EQ(frozen_step_size(events, Block::coefficients, 0, c, 7.0), 7.0);
    // 0.5 is closer to the centre but has one window against three.
    EXPECT_EQ(frozen_step_size(events, d, 0, c, 7.0), 0.3);
}

TEST(FrozenStepSize, OutsideWindowFallsBackToClosest) {
    const SamplerConfig c;
    const Block b = Block::beta;
    const std::vector<AdaptationEvent> events{
        {10, b, 0.95, 0.1, 0.125}, {20, b, 0.97, 0.1, 0.125}, {30, b, 0.40, 0.3, 0.24}};
    EXPECT_EQ(frozen_step_size(events, b, 0, c, 1.0), 0.1);
}

TEST(FrozenStepSize, TieGoesToSmallerStep) {
    SamplerConfig c;
    c.accept_low = 0.5;
    c.accept_high = 0.75;
    const Block b = Block::beta;
    const std::vector<AdaptationEvent> events{{10, b, 0.75, 0.4, 0.4}, {20, b, 0.5, 0.2, 0.2}};
    EXPECT_EQ(frozen_step_size(events, b, 0, c, 1.0), 0.2);
}

TEST(SamplerConfig, Validation) {
    SamplerConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n_burnin = c.n_iter;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = SamplerConfig{};
    c.accept_low = 0.9;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ActiveBlocks, SchemeAndModelKind) {
    const auto ar = ModelSpec::ar(1, SplineBasis(3, 6));
    const auto ing = ModelSpec::ingarch(1, 1, SplineBasis(3, 6));
    EXPECT_EQ(active_blocks(ar, BlockScheme::joint), (std::vector<Block>{Block::beta, Block::delta, Block::coefficients}));
    EXPECT_EQ(active_blocks(ing, BlockScheme::joint),
              (std::vector<Block>{Block::beta, Block::delta, Block::coefficients, Block::lambda0}));
    EXPECT_EQ(active_blocks(ing, BlockScheme::separate),
              (std::vector<Block>{Block::beta, Block::delta, Block::theta, Block::eta, Block::lambda0}));
}

TEST(RunChain, BookkeepingAndDeterminism) {
    const auto spec = ModelSpec::ingarch(1, 1, SplineBasis(3, 6));
    const auto series = short_ar_series();
    SamplerConfig c;
    c.n_iter = 10;
    c.n_burnin = 5;
    c.seed = 99;
    const auto a = run_chain(spec, series, c);
    const auto b = run_chain(spec, series, c);
    ASSERT_EQ(a.draws.size(), 5u);
    for (std::size_t d = 0; d < a.draws.size(); ++d) {
        EXPECT_EQ(flatten(a.draws[d], spec), flatten(b.draws[d], spec));
    }
    c.seed = 100;
    const auto other = run_chain(spec, series, c);
    EXPECT_NE(flatten(a.draws.back(), spec), flatten(other.draws.back(), spec));
}

TEST(RunChain, CachedLogPosteriorAndInvariants) {
    const auto spec = ModelSpec::ingarch(1, 1, SplineBasis(3, 6));
    const auto series = short_ar_series();
    const LogPosterior post(spec, series);
    SamplerConfig c;
    Rng rng(5);
    ChainState chain = initial_chain(post, c);
    for (int it = 0; it < 30; ++it) {
        for (Block b : active_blocks(spec, c.block_scheme)) {
            chain = hmc_transition(chain, b, post, c, rng).chain;
            ASSERT_EQ(chain.log_post, post.value(chain.state));
            ASSERT_TRUE(chain.state.satisfies_invariants(spec));
        }
    }
}

TEST(RunChain, AdaptationOnlyDuringBurnin) {
    const auto spec = ModelSpec::ar(1, SplineBasis(3, 6));
    const auto series = short_ar_series();
    SamplerConfig c;
    c.n_iter = 400;
    c.n_burnin = 200;
    c.adapt_interval = 50;
    const auto fit = run_chain(spec, series, c);
    ASSERT_EQ(fit.adaptation.size(), 4u * 3u);
    for (const auto& e : fit.adaptation) EXPECT_LE(e.iteration, c.n_burnin);
    for (const auto& b : fit.blocks) {
        EXPECT_EQ(b.step_size, frozen_step_size(fit.adaptation, b.block, c.n_burnin / 2, c, -1.0));
    }
    for (const auto& d : fit.draws) EXPECT_TRUE(check_constraints(d, spec, 101).pass);
}

TEST(RunChain, NonFiniteStartIsAnError) {
    // A vanishing prior variance makes the beta prior term overflow at the start.
    const auto spec = ModelSpec::ar(1, SplineBasis(3, 6), Hyperparameters{100.0, 1e-320, 0.1});
    const CountSeries series{{4, 6, 5, 7}, {}};
    SamplerConfig c;
    c.n_iter = 2;
    c.n_burnin = 1;
    EXPECT_THROW(run_chain(spec, series, c), std::runtime_error);
}

TEST(RunChains, IndependentSeedsAndMerge) {
    const auto spec = ModelSpec::ar(1, SplineBasis(3, 6));
    const auto series = short_ar_series();
    SamplerConfig c;
    c.n_iter = 20;
    c.n_burnin = 10;
    const auto fits = run_chains(spec, series, c, 2);
    ASSERT_EQ(fits.size(), 2u);
    EXPECT_NE(flatten(fits[0].draws.back(), spec), flatten(fits[1].draws.back(), spec));
    SamplerConfig c1 = c;
    c1.seed = c.seed + 1;
    EXPECT_EQ(flatten(run_chain(spec, series, c1).draws.back(), spec), flatten(fits[1].draws.back(), spec));
    const auto merged = merge_chains(fits);
    EXPECT_EQ(merged.draws.size(), 20u);
}
