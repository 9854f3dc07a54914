#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvcount/diagnostics.hpp"
#include "tvcount/inference.hpp"
#include "tvcount/simgen.hpp"

namespace tvcount::cli {

using nlohmann::json;

ModelSpec RunConfig::model_spec() const {
    const SplineBasis basis(degree, knots);
    const ModelKind kind = parse_model_kind(model);
    return kind == ModelKind::ar ? ModelSpec::ar(p, basis, hyper) : ModelSpec::ingarch(p, q, basis, hyper);
}

LoadOptions RunConfig::load_options() const {
    LoadOptions opts;
    opts.region = region;
    if (!from.empty()) opts.range.from = from;
    if (!to.empty()) opts.range.to = to;
    opts.mode = cumulative ? CountMode::cumulative : CountMode::daily;
    return opts;
}

namespace {

std::string_view scheme_name(BlockScheme s) { return s == BlockScheme::joint ? "joint" : "separate"; }

BlockScheme parse_scheme(std::string_view s) {
    if (s == "joint") return BlockScheme::joint;
    if (s == "separate") return BlockScheme::separate;
    throw std::invalid_argument("unknown block scheme '" + std::string(s) + "'");
}

json config_json(const RunConfig& c) {
    const auto& s = c.sampler;
    return json{{"model", c.model},
                {"p", c.p},
                {"q", c.q},
                {"degree", c.degree},
                {"knots", c.knots},
                {"c1", c.hyper.c1},
                {"c2", c.hyper.c2},
                {"d1", c.hyper.d1},
                {"iterations", s.n_iter},
                {"burnin", s.n_burnin},
                {"leapfrog", s.n_leapfrog},
                {"step_size", s.step_size_init},
                {"accept_low", s.accept_low},
                {"accept_high", s.accept_high},
                {"adapt_interval", s.adapt_interval},
                {"shrink", s.shrink},
                {"grow", s.grow},
                {"boundary", std::string(to_string(s.boundary))},
                {"block_scheme", std::string(scheme_name(s.block_scheme))},
                {"seed", s.seed},
                {"chains", c.chains},
                {"input", c.input},
                {"region", c.region},
                {"from", c.from},
                {"to", c.to},
                {"cumulative", c.cumulative},
                {"output_dir", c.output_dir}};
}

template <typename T>
void take(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

RunConfig config_from(const json& j, RunConfig c) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    const auto known = config_json(RunConfig{});
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    }
    auto& s = c.sampler;
    take(j, "model", c.model);
    take(j, "p", c.p);
    take(j, "q", c.q);
    take(j, "degree", c.degree);
    take(j, "knots", c.knots);
    take(j, "c1", c.hyper.c1);
    take(j, "c2", c.hyper.c2);
    take(j, "d1", c.hyper.d1);
    take(j, "iterations", s.n_iter);
    take(j, "burnin", s.n_burnin);
    take(j, "leapfrog", s.n_leapfrog);
    take(j, "step_size", s.step_size_init);
    take(j, "accept_low", s.accept_low);
    take(j, "accept_high", s.accept_high);
    take(j, "adapt_interval", s.adapt_interval);
    take(j, "shrink", s.shrink);
    take(j, "grow", s.grow);
    if (j.contains("boundary")) s.boundary = parse_boundary_mode(j.at("boundary").get<std::string>());
    if (j.contains("block_scheme")) s.block_scheme = parse_scheme(j.at("block_scheme").get<std::string>());
    take(j, "seed", s.seed);
    take(j, "chains", c.chains);
    take(j, "input", c.input);
    take(j, "region", c.region);
    take(j, "from", c.from);
    take(j, "to", c.to);
    take(j, "cumulative", c.cumulative);
    take(j, "output_dir", c.output_dir);
    return c;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    return ".";
}

void write_summaries(const FitResult& fit, std::span<const double> grid, const std::filesystem::path& dir) {
    for (const auto& fn : available_functions(fit.spec)) {
        write_summary_csv(dir / ("summary_" + fn.name() + ".csv"), summarize_function(fit, fn, grid));
    }
}

} // namespace

RunConfig parse_run_config(std::string_view json_text, RunConfig base) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from(j, std::move(base));
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    return parse_run_config(read_file(path), std::move(base));
}

std::string to_json(const RunConfig& config, int indent) { return config_json(config).dump(indent); }

FitOutcome run_fit(const RunConfig& config, std::ostream& log) {
    if (config.input.empty()) throw std::invalid_argument("fit needs an input file");
    if (config.chains < 1) throw std::invalid_argument("chains must be at least 1");
    const ModelSpec spec = config.model_spec();
    config.sampler.validate();

    FitOutcome outcome;
    outcome.data = load_count_series(config.input, config.load_options());
    for (const auto& w : outcome.data.warnings) log << "warning: " << w << '\n';
    const CountSeries& series = outcome.data.series;

    outcome.fit = merge_chains(run_chains(spec, series, config.sampler, static_cast<std::size_t>(config.chains)));
    outcome.lambda_hat = fitted_intensity(outcome.fit, spec, series);
    outcome.amse = amse(series, outcome.lambda_hat);

    const std::filesystem::path dir = config.output_dir.empty() ? default_output_dir() : std::filesystem::path(config.output_dir);
    std::filesystem::create_directories(dir);
    write_draws_csv(dir / "draws.csv", outcome.fit);
    write_summaries(outcome.fit, default_grid(series.size()), dir);
    write_fitted_csv(dir / "fitted.csv", series, outcome.lambda_hat);

    json blocks = json::array();
    for (const auto& b : outcome.fit.blocks) {
        blocks.push_back({{"block", std::string(to_string(b.block))},
                          {"acceptance_rate", b.acceptance_rate},
                          {"step_size", b.step_size}});
    }
    json adaptation = json::array();
    for (const auto& e : outcome.fit.adaptation) {
        adaptation.push_back({{"iteration", e.iteration},
                              {"block", std::string(to_string(e.block))},
                              {"acceptance_rate", e.acceptance},
                              {"window_step_size", e.window_step},
                              {"step_size", e.step_size}});
    }
    const json report{{"config", config_json(config)},
                      {"data",
                       {{"format", outcome.data.format},
                        {"count_mode", std::string(to_string(outcome.data.mode))},
                        {"T", series.size()},
                        {"first_date", series.labels.empty() ? "" : series.labels.front()},
                        {"last_date", series.labels.empty() ? "" : series.labels.back()},
                        {"warnings", outcome.data.warnings}}},
                      {"amse", outcome.amse},
                      {"n_draws", outcome.fit.draws.size()},
                      {"blocks", blocks},
                      {"adaptation", adaptation}};
    std::ofstream(dir / "fit.json", std::ios::binary) << report.dump(2) << '\n';
    return outcome;
}

namespace {

int cmd_simulate(const std::string& preset_name, std::size_t T, std::uint64_t seed, const std::string& output,
                 std::string lambda_output, std::string region, std::ostream& out) {
    const TrueFunctions truth = preset(preset_name);
    const auto sim = simulate(truth, truth.kind(), T, seed);
    const std::filesystem::path series_path = output;
    if (lambda_output.empty()) {
        lambda_output = (series_path.parent_path() / (series_path.stem().string() + "_lambda.csv")).string();
    }
    if (region.empty()) region = preset_name;
    if (series_path.has_parent_path()) std::filesystem::create_directories(series_path.parent_path());
    write_series_csv(series_path, sim.series, region);
    write_lambda_csv(lambda_output, sim.lambda);
    out << "wrote " << T << " counts to " << series_path.string() << " and true intensities to " << lambda_output
        << '\n';
    return 0;
}

int cmd_gradcheck(const RunConfig& config, std::size_t n_states, std::size_t n_series, std::size_t T,
                  double h, double tol, std::ostream& out) {
    const ModelSpec spec = config.model_spec();
    const auto report = gradient_check(spec, n_series, n_states, T, config.sampler.seed, h);
    out << "model " << to_string(spec.kind) << "(p=" << spec.p << ", q=" << spec.q << "), " << report.states_checked
        << " states\n";
    out << "max relative error: " << format_double(report.max_relative_error) << '\n';
    if (report.max_relative_error < tol) return 0;
    out << "FAILED: exceeds tolerance " << format_double(tol) << '\n';
    return 1;
}

int cmd_summarize(const std::filesystem::path& dir, std::filesystem::path out_dir, std::size_t grid_size,
                  const std::vector<std::string>& functions, std::ostream& out) {
    const json report = json::parse(read_file(dir / "fit.json"));
    const RunConfig config = config_from(report.at("config"), RunConfig{});
    FitResult fit;
    fit.spec = config.model_spec();
    fit.config = config.sampler;
    fit.draws = read_draws_csv(dir / "draws.csv", fit.spec);
    if (fit.draws.empty()) throw std::runtime_error("draws.csv holds no draws");

    const std::size_t n = grid_size > 0 ? grid_size : report.at("data").at("T").get<std::size_t>();
    const auto grid = default_grid(n);
    if (out_dir.empty()) out_dir = dir;
    std::filesystem::create_directories(out_dir);

    std::vector<FunctionId> selected;
    if (functions.empty()) {
        selected = available_functions(fit.spec);
    } else {
        for (const auto& f : functions) selected.push_back(FunctionId::parse(f));
    }
    for (const auto& fn : selected) {
        const auto path = out_dir / ("summary_" + fn.name() + ".csv");
        write_summary_csv(path, summarize_function(fit, fn, grid));
        out << "wrote " << path.string() << '\n';
    }
    return 0;
}

struct FlagBinding {
    CLI::Option* option;
    std::function<void(RunConfig&)> apply;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian time-varying Poisson autoregression (TVBARC / TVBINGARCH) via HMC", "tvcount"};
    app.require_subcommand(1);

    // Shared model flags; values land in `flags` and are overlaid on the config file afterwards.
    RunConfig flags;
    std::string boundary = "clamp";
    std::string scheme = "joint";
    std::vector<FlagBinding> bindings;
    auto bind = [&bindings](CLI::Option* opt, std::function<void(RunConfig&)> apply) {
        bindings.push_back({opt, std::move(apply)});
    };
    auto add_model_flags = [&](CLI::App* sub) {
        bind(sub->add_option("--model", flags.model, "ar | ingarch")->check(CLI::IsMember({"ar", "ingarch"})),
             [&](RunConfig& c) { c.model = flags.model; });
        bind(sub->add_option("--p", flags.p, "AR order")->check(CLI::NonNegativeNumber),
             [&](RunConfig& c) { c.p = flags.p; });
        bind(sub->add_option("--q", flags.q, "feedback (CH) order")->check(CLI::NonNegativeNumber),
             [&](RunConfig& c) { c.q = flags.q; });
        bind(sub->add_option("--degree", flags.degree, "spline degree")->check(CLI::NonNegativeNumber),
             [&](RunConfig& c) { c.degree = flags.degree; });
        bind(sub->add_option("--knots", flags.knots, "equidistant knots including endpoints")->check(CLI::Range(2, 1000)),
             [&](RunConfig& c) { c.knots = flags.knots; });
        bind(sub->add_option("--c1", flags.hyper.c1, "prior variance of delta")->check(CLI::PositiveNumber),
             [&](RunConfig& c) { c.hyper.c1 = flags.hyper.c1; });
        bind(sub->add_option("--c2", flags.hyper.c2, "prior variance of beta")->check(CLI::PositiveNumber),
             [&](RunConfig& c) { c.hyper.c2 = flags.hyper.c2; });
        bind(sub->add_option("--d1", flags.hyper.d1, "inverse-gamma hyperparameter of lambda0")->check(CLI::PositiveNumber),
             [&](RunConfig& c) { c.hyper.d1 = flags.hyper.d1; });
        bind(sub->add_option("--seed", flags.sampler.seed, "random seed"),
             [&](RunConfig& c) { c.sampler.seed = flags.sampler.seed; });
    };

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model and write draws, summaries and fit.json");
    std::string config_path;
    fit->add_option("--config", config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    add_model_flags(fit);
    bind(fit->add_option("--input", flags.input, "count CSV (long date,region,count or wide layout)"),
         [&](RunConfig& c) { c.input = flags.input; });
    bind(fit->add_option("--region", flags.region, "region to select"), [&](RunConfig& c) { c.region = flags.region; });
    bind(fit->add_option("--from", flags.from, "first date (inclusive)"), [&](RunConfig& c) { c.from = flags.from; });
    bind(fit->add_option("--to", flags.to, "last date (inclusive)"), [&](RunConfig& c) { c.to = flags.to; });
    bind(fit->add_flag("--cumulative", flags.cumulative, "input holds cumulative counts; difference to daily"),
         [&](RunConfig& c) { c.cumulative = flags.cumulative; });
    bind(fit->add_option("--iterations", flags.sampler.n_iter, "total MCMC iterations")->check(CLI::PositiveNumber),
         [&](RunConfig& c) { c.sampler.n_iter = flags.sampler.n_iter; });
    bind(fit->add_option("--burnin", flags.sampler.n_burnin, "burn-in iterations")->check(CLI::NonNegativeNumber),
         [&](RunConfig& c) { c.sampler.n_burnin = flags.sampler.n_burnin; });
    bind(fit->add_option("--leapfrog", flags.sampler.n_leapfrog, "leapfrog steps per proposal")->check(CLI::PositiveNumber),
         [&](RunConfig& c) { c.sampler.n_leapfrog = flags.sampler.n_leapfrog; });
    bind(fit->add_option("--step-size", flags.sampler.step_size_init, "initial step size")->check(CLI::PositiveNumber),
         [&](RunConfig& c) { c.sampler.step_size_init = flags.sampler.step_size_init; });
    bind(fit->add_option("--adapt-interval", flags.sampler.adapt_interval, "iterations between step-size updates")
             ->check(CLI::PositiveNumber),
         [&](RunConfig& c) { c.sampler.adapt_interval = flags.sampler.adapt_interval; });
    bind(fit->add_option("--boundary", boundary, "clamp | clamp-each-step | reflect")
                 ->check(CLI::IsMember({"clamp", "clamp-each-step", "reflect"})),
         [&](RunConfig& c) { c.sampler.boundary = parse_boundary_mode(boundary); });
    bind(fit->add_option("--block-scheme", scheme, "joint | separate")->check(CLI::IsMember({"joint", "separate"})),
         [&](RunConfig& c) { c.sampler.block_scheme = parse_scheme(scheme); });
    bind(fit->add_option("--chains", flags.chains, "independent chains (pooled)")->check(CLI::PositiveNumber),
         [&](RunConfig& c) { c.chains = flags.chains; });
    bind(fit->add_option("--out", flags.output_dir, std::string("output directory (default $") + kOutputDirEnv + " or .)"),
         [&](RunConfig& c) { c.output_dir = flags.output_dir; });

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a series from a preset truth");
    std::string preset_name;
    std::size_t sim_T = 1000;
    std::uint64_t sim_seed = 1;
    std::string sim_output = "simulated.csv";
    std::string sim_lambda;
    std::string sim_region;
    sim->add_option("--preset", preset_name, "ar1 | ar2 | ingarch11")->required()->check(CLI::IsMember(preset_names()));
    sim->add_option("--T", sim_T, "series length")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--output", sim_output, "series CSV path");
    sim->add_option("--lambda-output", sim_lambda, "true intensity CSV (default <output stem>_lambda.csv)");
    sim->add_option("--region", sim_region, "region column value (default: preset name)");

    // summarize
    auto* summ = app.add_subcommand("summarize", "recompute function summaries from a fit directory");
    std::string summ_dir;
    std::string summ_out;
    std::size_t summ_grid = 0;
    std::vector<std::string> summ_fns;
    summ->add_option("--dir", summ_dir, "directory holding draws.csv and fit.json")->required()->check(CLI::ExistingDirectory);
    summ->add_option("--out", summ_out, "output directory (default: --dir)");
    summ->add_option("--grid-size", summ_grid, "grid points i/N, i=1..N (default: T)");
    summ->add_option("--functions", summ_fns, "subset, e.g. mu a1 dmu")->delimiter(',');

    // gradcheck
    auto* grad = app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
    add_model_flags(grad);
    std::size_t gc_states = 50;
    std::size_t gc_series = 3;
    std::size_t gc_T = 200;
    double gc_h = 1e-5;
    double gc_tol = 1e-5;
    grad->add_option("--states", gc_states, "random states per series")->check(CLI::PositiveNumber);
    grad->add_option("--series", gc_series, "simulated series")->check(CLI::PositiveNumber);
    grad->add_option("--T", gc_T, "length of each simulated series")->check(CLI::PositiveNumber);
    grad->add_option("--fd-step", gc_h, "finite-difference step")->check(CLI::PositiveNumber);
    grad->add_option("--tol", gc_tol, "pass threshold on the max relative error")->check(CLI::PositiveNumber);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        RunConfig config;
        if (!config_path.empty()) config = load_run_config(config_path);
        for (const auto& b : bindings) {
            if (b.option->count() > 0) b.apply(config);
        }
        if (fit->parsed()) {
            const auto outcome = run_fit(config, err);
            out << "draws: " << outcome.fit.draws.size() << '\n';
            for (const auto& b : outcome.fit.blocks) {
                out << "acceptance " << to_string(b.block) << ": " << format_double(b.acceptance_rate) << '\n';
            }
            out << "AMSE: " << format_double(outcome.amse) << '\n';
            return 0;
        }
        if (sim->parsed()) {
            return cmd_simulate(preset_name, sim_T, sim_seed, sim_output, sim_lambda, sim_region, out);
        }
        if (summ->parsed()) {
            return cmd_summarize(summ_dir, summ_out, summ_grid, summ_fns, out);
        }
        if (grad->parsed()) {
            if (parse_model_kind(config.model) == ModelKind::ar) config.q = 0;
            return cmd_gradcheck(config, gc_states, gc_series, gc_T, gc_h, gc_tol, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace tvcount::cli
