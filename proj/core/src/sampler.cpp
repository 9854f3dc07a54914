#include "tvcount/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

namespace tvcount {

std::string_view to_string(BoundaryMode mode) {
    switch (mode) {
    case BoundaryMode::clamp: return "clamp";
    case BoundaryMode::clamp_each_step: return "clamp-each-step";
    case BoundaryMode::reflect: return "reflect";
    case BoundaryMode::none: return "none";
    }
    return "clamp";
}

BoundaryMode parse_boundary_mode(std::string_view name) {
    if (name == "clamp") return BoundaryMode::clamp;
    if (name == "clamp-each-step") return BoundaryMode::clamp_each_step;
    if (name == "reflect") return BoundaryMode::reflect;
    if (name == "none") return BoundaryMode::none;
    throw std::invalid_argument("unknown boundary mode '" + std::string(name) + "'");
}

std::string_view to_string(Block block) {
    switch (block) {
    case Block::beta: return "beta";
    case Block::delta: return "delta";
    case Block::coefficients: return "coefficients";
    case Block::theta: return "theta";
    case Block::eta: return "eta";
    case Block::lambda0: return "lambda0";
    }
    return "beta";
}

void SamplerConfig::validate() const {
    if (n_leapfrog < 1) throw std::invalid_argument("n_leapfrog must be at least 1");
    if (!(step_size_init > 0.0)) throw std::invalid_argument("initial step size must be positive");
    if (!(0.0 < accept_low && accept_low < accept_high && accept_high < 1.0)) {
        throw std::invalid_argument("acceptance window must satisfy 0 < low < high < 1");
    }
    if (adapt_interval < 1) throw std::invalid_argument("adapt_interval must be at least 1");
    if (!(shrink > 0.0 && shrink < 1.0) || !(grow > 1.0)) {
        throw std::invalid_argument("step-size factors need 0 < shrink < 1 < grow");
    }
    if (n_iter < 1 || n_burnin < 0 || n_burnin >= n_iter) {
        throw std::invalid_argument("need 0 <= n_burnin < n_iter");
    }
}

std::vector<Block> active_blocks(const ModelSpec& spec, BlockScheme scheme) {
    std::vector<Block> blocks{Block::beta, Block::delta};
    if (scheme == BlockScheme::joint) {
        if (spec.p + spec.q > 0) blocks.push_back(Block::coefficients);
    } else {
        if (spec.p > 0) blocks.push_back(Block::theta);
        if (spec.q > 0) blocks.push_back(Block::eta);
    }
    if (spec.has_lambda0()) blocks.push_back(Block::lambda0);
    return blocks;
}

void apply_boundary(std::span<double> position, std::span<double> momentum, std::span<const Interval> bounds,
                    BoundaryMode mode) {
    if (mode == BoundaryMode::none) return;
    if (mode == BoundaryMode::clamp_each_step) mode = BoundaryMode::clamp;
    for (std::size_t i = 0; i < position.size(); ++i) {
        const auto [lo, hi] = bounds[i];
        double& x = position[i];
        if (mode == BoundaryMode::clamp) {
            x = std::clamp(x, lo, hi);
            continue;
        }
        // Reflect until inside; a finite box is needed for the loop to make progress.
        if (!std::isfinite(x)) continue;
        while (x < lo || x > hi) {
            if (x < lo) x = 2.0 * lo - x;
            if (x > hi) x = 2.0 * hi - x;
            momentum[i] = -momentum[i];
        }
    }
}

HmcStep hmc_step(std::span<const double> position, double log_density, const HmcTarget& target, double step_size,
                 int n_leapfrog, std::span<const Interval> bounds, BoundaryMode mode, Rng& rng) {
    const std::size_t n = position.size();
    HmcStep result{std::vector<double>(position.begin(), position.end()), log_density, 0.0, false};

    std::vector<double> q(position.begin(), position.end());
    std::vector<double> mom(n);
    for (auto& v : mom) v = standard_normal(rng);
    const double kinetic0 = 0.5 * std::inner_product(mom.begin(), mom.end(), mom.begin(), 0.0);

    std::vector<double> grad(n);
    auto finite_grad = [&grad] { return std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); }); };
    auto reject = [&] {
        // The uniform draw is consumed on every path so RNG streams stay aligned.
        (void)uniform01(rng);
        return result;
    };

    target.gradient(q, grad);
    if (!finite_grad()) return reject();
    for (std::size_t i = 0; i < n; ++i) mom[i] += 0.5 * step_size * grad[i];
    for (int l = 0; l < n_leapfrog; ++l) {
        for (std::size_t i = 0; i < n; ++i) q[i] += step_size * mom[i];
        if (mode != BoundaryMode::clamp) apply_boundary(q, mom, bounds, mode);
        target.gradient(q, grad);
        if (!finite_grad()) return reject();
        const double scale = (l + 1 == n_leapfrog) ? 0.5 * step_size : step_size;
        for (std::size_t i = 0; i < n; ++i) mom[i] += scale * grad[i];
    }

    if (mode == BoundaryMode::clamp) apply_boundary(q, mom, bounds, mode);
    const double proposed = target.log_density(q);
    const double kinetic1 = 0.5 * std::inner_product(mom.begin(), mom.end(), mom.begin(), 0.0);
    const double log_ratio = (proposed - kinetic1) - (log_density - kinetic0);
    const double u = uniform01(rng);
    if (!std::isfinite(log_ratio)) return result;
    result.accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    if (std::log(u) < log_ratio) {
        result.position = std::move(q);
        result.log_density = proposed;
        result.accepted = true;
    }
    return result;
}

namespace {

struct Range {
    std::size_t begin;
    std::size_t end;
};

Range block_range(Block block, const ParamLayout& layout) {
    switch (block) {
    case Block::beta: return {layout.beta, layout.theta};
    case Block::delta: return {layout.delta, layout.lambda0};
    case Block::coefficients: return {layout.theta, layout.delta};
    case Block::theta: return {layout.theta, layout.eta};
    case Block::eta: return {layout.eta, layout.delta};
    case Block::lambda0: return {layout.lambda0, layout.total};
    }
    return {0, 0};
}

} // namespace

ParamState initial_state(const ModelSpec& spec, const CountSeries& series) {
    ParamState s = ParamState::zeros(spec);
    double mean = 0.0;
    if (series.size() > 0) {
        mean = std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(series.size());
    }
    // Partition of unity: mu(x) = exp(beta) when every beta_j is equal.
    std::fill(s.beta.begin(), s.beta.end(), std::log(mean + 1.0));
    std::fill(s.theta.begin(), s.theta.end(), 0.5);
    std::fill(s.eta.begin(), s.eta.end(), 0.5);
    s.lambda0 = mean + 1.0;
    return s;
}

ChainState initial_chain(const LogPosterior& posterior, const SamplerConfig& config) {
    ChainState chain;
    chain.state = initial_state(posterior.spec(), posterior.series());
    chain.log_post = posterior.value(chain.state);
    if (!std::isfinite(chain.log_post)) {
        throw std::runtime_error("initial log posterior is not finite");
    }
    chain.step_size.fill(config.step_size_init);
    return chain;
}

Transition hmc_transition(const ChainState& chain, Block block, const LogPosterior& posterior,
                          const SamplerConfig& config, Rng& rng) {
    const ModelSpec& spec = posterior.spec();
    const ParamLayout layout(spec);
    const auto [begin, end] = block_range(block, layout);
    const auto coords = flatten(chain.state, spec);

    auto assemble = [&](std::span<const double> q) {
        auto full = coords;
        std::copy(q.begin(), q.end(), full.begin() + static_cast<std::ptrdiff_t>(begin));
        return unflatten(full, spec);
    };

    HmcTarget target;
    target.log_density = [&](std::span<const double> q) { return posterior.value(assemble(q)); };
    if (block == Block::lambda0) {
        target.gradient = [&](std::span<const double> q, std::span<double> out) {
            out[0] = q[0] > 0.0 ? posterior.lambda0_derivative(assemble(q))
                                : std::numeric_limits<double>::quiet_NaN();
        };
    } else {
        target.gradient = [&](std::span<const double> q, std::span<double> out) {
            const auto g = flatten(posterior.gradient(assemble(q), false), spec);
            std::copy(g.begin() + static_cast<std::ptrdiff_t>(begin), g.begin() + static_cast<std::ptrdiff_t>(end),
                      out.begin());
        };
    }

    std::vector<Interval> bounds(end - begin, Interval{-std::numeric_limits<double>::infinity(),
                                                       std::numeric_limits<double>::infinity()});
    BoundaryMode mode = BoundaryMode::none;
    if (block == Block::coefficients || block == Block::theta || block == Block::eta) {
        std::fill(bounds.begin(), bounds.end(), Interval{0.0, 1.0});
        mode = config.boundary;
    }

    const auto idx = static_cast<std::size_t>(block);
    const std::span<const double> position(coords.data() + begin, end - begin);
    auto step = hmc_step(position, chain.log_post, target, chain.step_size[idx], config.n_leapfrog, bounds, mode, rng);

    Transition out{chain, step.accepted};
    if (step.accepted) {
        out.chain.state = assemble(step.position);
        out.chain.log_post = step.log_density;
    }
    out.chain.window[idx].proposed += 1;
    out.chain.window[idx].accepted += step.accepted ? 1 : 0;
    return out;
}

double adapt_step_size(double step_size, double acceptance_rate, const SamplerConfig& config) {
    if (acceptance_rate < config.accept_low) return step_size * config.shrink;
    if (acceptance_rate > config.accept_high) return step_size * config.grow;
    return step_size;
}

std::vector<AdaptationEvent> adapt_step_sizes(ChainState& chain, std::span<const Block> blocks,
                                              const SamplerConfig& config) {
    std::vector<AdaptationEvent> events;
    for (Block b : blocks) {
        const auto idx = static_cast<std::size_t>(b);
        const double rate = chain.window[idx].rate();
        const double used = chain.step_size[idx];
        chain.step_size[idx] = adapt_step_size(used, rate, config);
        chain.window[idx] = {};
        events.push_back({chain.iteration, b, rate, used, chain.step_size[idx]});
    }
    return events;
}

double frozen_step_size(std::span<const AdaptationEvent> events, Block block, int from_iteration,
                        const SamplerConfig& config, double fallback) {
    // Windows are equally long, so pooling is a plain mean of their rates.
    std::map<double, std::pair<double, int>> pooled;
    for (const auto& e : events) {
        if (e.block != block || e.iteration <= from_iteration) continue;
        auto& [sum, n] = pooled[e.window_step];
        sum += e.acceptance;
        n += 1;
    }
    // Rank by (inside the window, number of windows, closeness to the centre). The map runs over
    // increasing steps, so the smaller step wins full ties.
    const double centre = 0.5 * (config.accept_low + config.accept_high);
    double best = fallback;
    std::tuple<bool, int, double> best_key{false, 0, -std::numeric_limits<double>::infinity()};
    for (const auto& [step, acc] : pooled) {
        const double rate = acc.first / acc.second;
        const bool inside = rate >= config.accept_low && rate <= config.accept_high;
        const std::tuple<bool, int, double> key{inside, inside ? acc.second : 0, -std::abs(rate - centre)};
        if (key > best_key) {
            best = step;
            best_key = key;
        }
    }
    return best;
}

FitResult run_chain(const ModelSpec& spec, const CountSeries& series, const SamplerConfig& config) {
    config.validate();
    series.validate();
    const LogPosterior posterior(spec, series);
    const auto blocks = active_blocks(spec, config.block_scheme);

    FitResult fit{spec, config, {}, {}, {}, {}};
    fit.draws.reserve(static_cast<std::size_t>(config.n_iter - config.n_burnin));
    Rng rng(config.seed);
    ChainState chain = initial_chain(posterior, config);

    for (int it = 1; it <= config.n_iter; ++it) {
        chain.iteration = it;
        const bool burnin = it <= config.n_burnin;
        for (Block b : blocks) {
            auto [next, accepted] = hmc_transition(chain, b, posterior, config, rng);
            chain = std::move(next);
            if (!burnin) {
                auto& kept = chain.kept[static_cast<std::size_t>(b)];
                kept.proposed += 1;
                kept.accepted += accepted ? 1 : 0;
            }
        }
        if (burnin && it % config.adapt_interval == 0) {
            auto events = adapt_step_sizes(chain, blocks, config);
            fit.adaptation.insert(fit.adaptation.end(), events.begin(), events.end());
        }
        if (it == config.n_burnin) {
            // Single windows are noisy because the delta conditional narrows and widens along the
            // chain, so the frozen step comes from all windows of the second half.
            for (Block b : blocks) {
                auto& step = chain.step_size[static_cast<std::size_t>(b)];
                step = frozen_step_size(fit.adaptation, b, config.n_burnin / 2, config, step);
            }
        }
        if (!burnin) {
            fit.draws.push_back(chain.state);
            fit.log_posterior.push_back(chain.log_post);
        }
    }

    for (Block b : blocks) {
        const auto idx = static_cast<std::size_t>(b);
        fit.blocks.push_back({b, chain.step_size[idx], chain.kept[idx].rate()});
    }
    return fit;
}

std::vector<FitResult> run_chains(const ModelSpec& spec, const CountSeries& series, const SamplerConfig& config,
                                  std::size_t n_chains) {
    if (n_chains == 0) throw std::invalid_argument("need at least one chain");
    std::vector<FitResult> fits(n_chains);
    if (n_chains == 1) {
        fits[0] = run_chain(spec, series, config);
        return fits;
    }
    std::vector<std::exception_ptr> errors(n_chains);
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < n_chains; ++c) {
        workers.emplace_back([&, c] {
            try {
                SamplerConfig cc = config;
                cc.seed = config.seed + c;
                fits[c] = run_chain(spec, series, cc);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    workers.clear();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return fits;
}

FitResult merge_chains(std::vector<FitResult> chains) {
    if (chains.empty()) throw std::invalid_argument("no chains to merge");
    FitResult merged = std::move(chains.front());
    for (std::size_t c = 1; c < chains.size(); ++c) {
        auto& other = chains[c];
        merged.draws.insert(merged.draws.end(), other.draws.begin(), other.draws.end());
        merged.log_posterior.insert(merged.log_posterior.end(), other.log_posterior.begin(), other.log_posterior.end());
        merged.adaptation.insert(merged.adaptation.end(), other.adaptation.begin(), other.adaptation.end());
        for (std::size_t b = 0; b < merged.blocks.size(); ++b) {
            merged.blocks[b].acceptance_rate += other.blocks[b].acceptance_rate;
            merged.blocks[b].step_size += other.blocks[b].step_size;
        }
    }
    const auto n = static_cast<double>(chains.size());
    for (auto& b : merged.blocks) {
        b.acceptance_rate /= n;
        b.step_size /= n;
    }
    return merged;
}

} // namespace tvcount
