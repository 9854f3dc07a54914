#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tvcount/io.hpp"
#include "tvcount/model.hpp"
#include "tvcount/sampler.hpp"

namespace tvcount::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "TVCOUNT_OUTPUT_DIR";

/// Everything a `fit` run needs. Defaults reproduce the reference settings:
/// c1 = c2 = 100, d1 = 0.1, cubic splines on 6 knots, 10000 iterations with 5000 burn-in.
struct RunConfig {
    std::string model = "ar";
    int p = 1;
    int q = 0;
    int degree = 3;
    int knots = 6;
    Hyperparameters hyper{};
    SamplerConfig sampler{};
    int chains = 1;

    std::string input;
    std::string region;
    std::string from;
    std::string to;
    bool cumulative = false;
    std::string output_dir;

    ModelSpec model_spec() const;
    LoadOptions load_options() const;
};

/// Flat JSON object; keys mirror the long flag names. Unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});
std::string to_json(const RunConfig& config, int indent = 2);

struct FitOutcome {
    LoadReport data;
    FitResult fit;
    std::vector<double> lambda_hat;
    double amse = 0.0;
};

/// Loads data, runs the chains, writes draws.csv, summary_<fn>.csv, fitted.csv and fit.json.
FitOutcome run_fit(const RunConfig& config, std::ostream& log);

/// Entry point behind the `tvcount` executable. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

} // namespace tvcount::cli
