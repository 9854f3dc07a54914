#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "tvcount/model.hpp"
#include "tvcount/posterior.hpp"
#include "tvcount/rng.hpp"

namespace tvcount {

/// What happens to a box-constrained coordinate that leaves its interval during a leapfrog step.
enum class BoundaryMode {
    clamp,           // leapfrog freely, then move the candidate to the nearest boundary point
    clamp_each_step, // move to the nearest boundary point after every position update
    reflect, // mirror position into the box and flip that momentum component
    none,    // unconstrained target
};

std::string_view to_string(BoundaryMode mode);
BoundaryMode parse_boundary_mode(std::string_view name);

/// Coordinate groups updated by separate HMC moves, in the order they run each iteration.
enum class Block : std::size_t { beta = 0, delta, coefficients, theta, eta, lambda0 };
inline constexpr std::size_t kBlockCount = 6;

std::string_view to_string(Block block);

enum class BlockScheme {
    joint,    // theta and eta move together (coefficients block)
    separate, // theta and eta get their own moves
};

struct SamplerConfig {
    int n_leapfrog = 30;
    double step_size_init = 0.01;
    double accept_low = 0.6;
    double accept_high = 0.8;
    int adapt_interval = 100;
    double shrink = 0.8;
    double grow = 1.25;
    int n_iter = 10000;
    int n_burnin = 5000;
    std::uint64_t seed = 1;
    BoundaryMode boundary = BoundaryMode::clamp;
    BlockScheme block_scheme = BlockScheme::joint;

    void validate() const;
};

/// Blocks that exist for `spec` under `scheme`, in update order.
std::vector<Block> active_blocks(const ModelSpec& spec, BlockScheme scheme);

// ---------------------------------------------------------------------------
// Generic HMC kernel over a flat coordinate vector.

struct HmcTarget {
    std::function<double(std::span<const double>)> log_density;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
};

/// Closed interval per coordinate; use +-infinity for free coordinates.
struct Interval {
    double lower;
    double upper;
};

/// Applies `mode` to every coordinate of `position` (and `momentum` when reflecting).
void apply_boundary(std::span<double> position, std::span<double> momentum, std::span<const Interval> bounds,
                    BoundaryMode mode);

struct HmcStep {
    std::vector<double> position;
    double log_density = 0.0;
    double accept_prob = 0.0;
    bool accepted = false;
};

/// One HMC proposal with unit mass matrix: Gaussian momentum, `n_leapfrog`
/// leapfrog steps with the boundary map after every position update, then a
/// Metropolis accept/reject on the total energy. Non-finite energies reject.
HmcStep hmc_step(std::span<const double> position, double log_density, const HmcTarget& target, double step_size,
                 int n_leapfrog, std::span<const Interval> bounds, BoundaryMode mode, Rng& rng);

// ---------------------------------------------------------------------------
// Blocked sampler for the count models.

struct BlockCounters {
    std::size_t accepted = 0;
    std::size_t proposed = 0;

    double rate() const noexcept {
        return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
};

struct ChainState {
    ParamState state;
    double log_post = 0.0; // always log_posterior(state)
    std::array<double, kBlockCount> step_size{};
    std::array<BlockCounters, kBlockCount> window{}; // since the last adaptation
    std::array<BlockCounters, kBlockCount> kept{};   // after burn-in
    int iteration = 0;
};

/// Scale-aware interior start: mu near the sample mean, delta = 0, theta = eta = 0.5.
ParamState initial_state(const ModelSpec& spec, const CountSeries& series);
ChainState initial_chain(const LogPosterior& posterior, const SamplerConfig& config);

struct Transition {
    ChainState chain;
    bool accepted = false;
};

/// HMC move on one block with the other coordinates held fixed. lambda0 uses the
/// finite-difference derivative.
Transition hmc_transition(const ChainState& chain, Block block, const LogPosterior& posterior,
                          const SamplerConfig& config, Rng& rng);

/// Shrinks the step below the acceptance window, grows it above, keeps it inside.
double adapt_step_size(double step_size, double acceptance_rate, const SamplerConfig& config);

struct AdaptationEvent {
    int iteration = 0;
    Block block = Block::beta;
    double acceptance = 0.0;
    double window_step = 0.0; // used during the window
    double step_size = 0.0;   // after the update
};

/// Applies adapt_step_size to every active block from its window counters, then resets them.
std::vector<AdaptationEvent> adapt_step_sizes(ChainState& chain, std::span<const Block> blocks,
                                              const SamplerConfig& config);

/// Step size to freeze for `block` at the end of burn-in. Windows ending after `from_iteration`
/// are pooled by the step they ran with. Among tried steps whose pooled acceptance lies in the
/// acceptance window, the one with the most windows wins; otherwise the one closest to the middle
/// of the window. Remaining ties go to the smaller step. Returns `fallback` if no window qualifies.
double frozen_step_size(std::span<const AdaptationEvent> events, Block block, int from_iteration,
                        const SamplerConfig& config, double fallback);

struct BlockSummary {
    Block block = Block::beta;
    double step_size = 0.0;
    double acceptance_rate = 0.0; // post burn-in
};

struct FitResult {
    ModelSpec spec;
    SamplerConfig config;
    std::vector<ParamState> draws; // post burn-in, in iteration order
    std::vector<double> log_posterior;
    std::vector<AdaptationEvent> adaptation;
    std::vector<BlockSummary> blocks;
};

FitResult run_chain(const ModelSpec& spec, const CountSeries& series, const SamplerConfig& config);

/// Independent chains on separate threads; chain c uses seed `config.seed + c`.
std::vector<FitResult> run_chains(const ModelSpec& spec, const CountSeries& series, const SamplerConfig& config,
                                  std::size_t n_chains);

/// Pools draws of several chains; block summaries are averaged.
FitResult merge_chains(std::vector<FitResult> chains);

} // namespace tvcount
