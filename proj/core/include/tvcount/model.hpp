#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvcount/spline_basis.hpp"

namespace tvcount {

enum class ModelKind { ar, ingarch };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Ordered non-negative counts X_1..X_T, with optional date labels.
struct CountSeries {
    std::vector<std::int64_t> values;
    std::vector<std::string> labels;

    std::size_t size() const noexcept { return values.size(); }
    /// Throws std::invalid_argument on negative counts, empty series or a label/value length mismatch.
    void validate() const;
};

struct Hyperparameters {
    double c1 = 100.0; // prior variance of delta
    double c2 = 100.0; // prior variance of beta
    double d1 = 0.1;   // inverse-gamma shape and rate of lambda0
};

/// Model kind, lag orders, one spline basis per coefficient family and prior hyperparameters.
struct ModelSpec {
    ModelKind kind = ModelKind::ar;
    int p = 1;
    int q = 0;
    SplineBasis mu_basis{3, 6};
    SplineBasis ar_basis{3, 6};
    SplineBasis ch_basis{3, 6};
    Hyperparameters hyper{};

    static ModelSpec ar(int p, const SplineBasis& basis, Hyperparameters hyper = {});
    static ModelSpec ingarch(int p, int q, const SplineBasis& basis, Hyperparameters hyper = {});

    std::size_t k1() const noexcept { return mu_basis.size(); }
    std::size_t k2() const noexcept { return ar_basis.size(); }
    std::size_t k3() const noexcept { return ch_basis.size(); }
    std::size_t order() const noexcept { return static_cast<std::size_t>(p + q); }
    bool has_lambda0() const noexcept { return kind == ModelKind::ingarch; }

    void validate() const;
};

/// Coordinates of one posterior draw. theta is p x K2 and eta is q x K3, both row-major.
struct ParamState {
    std::vector<double> beta;
    std::vector<double> theta;
    std::vector<double> eta;
    std::vector<double> delta; // delta_0 (slack) .. delta_{p+q}
    double lambda0 = 1.0;

    /// Zero-valued state with the shapes implied by `spec`.
    static ParamState zeros(const ModelSpec& spec);

    double& theta_at(const ModelSpec& spec, std::size_t lag, std::size_t j) { return theta[lag * spec.k2() + j]; }
    double theta_at(const ModelSpec& spec, std::size_t lag, std::size_t j) const {
        return theta[lag * spec.k2() + j];
    }
    double& eta_at(const ModelSpec& spec, std::size_t lag, std::size_t j) { return eta[lag * spec.k3() + j]; }
    double eta_at(const ModelSpec& spec, std::size_t lag, std::size_t j) const { return eta[lag * spec.k3() + j]; }

    /// Shapes match `spec`; 0 <= theta, eta <= 1; lambda0 > 0 (INGARCH only); all finite.
    bool satisfies_invariants(const ModelSpec& spec) const;
};

/// Offsets of each parameter family inside the flat coordinate vector
/// (beta, theta, eta, delta, then lambda0 for INGARCH).
struct ParamLayout {
    std::size_t beta = 0;
    std::size_t theta = 0;
    std::size_t eta = 0;
    std::size_t delta = 0;
    std::size_t lambda0 = 0;
    std::size_t total = 0;

    explicit ParamLayout(const ModelSpec& spec);
};

std::vector<double> flatten(const ParamState& state, const ModelSpec& spec);
ParamState unflatten(std::span<const double> coords, const ModelSpec& spec);
/// Column names matching `flatten` order: beta_1, theta_1_1, eta_1_1, delta_0, lambda0, ...
std::vector<std::string> coordinate_names(const ModelSpec& spec);

/// Softmax weights M_1..M_{p+q} of delta_0..delta_{p+q}, slack index 0 excluded.
std::vector<double> transform_weights(std::span<const double> delta);

double eval_mu(const ParamState& state, const ModelSpec& spec, double x);
/// a_lag(x) for lag in 1..p.
double eval_ar_coef(const ParamState& state, const ModelSpec& spec, int lag, double x);
/// b_lag(x) for lag in 1..q.
double eval_ch_coef(const ParamState& state, const ModelSpec& spec, int lag, double x);

/// Basis functions tabulated on a fixed grid, one row per grid point.
class BasisDesign {
public:
    BasisDesign(const SplineBasis& basis, std::span<const double> grid);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

/// Rescaled times t/T for t = 1..T.
std::vector<double> rescaled_times(std::size_t T);

/// mu(x), a_i(x) and b_k(x) on every grid point of a design, plus the
/// unweighted profiles sum_j theta_ij B_j(x) and sum_j eta_kj B_j(x).
struct CoefficientPaths {
    std::vector<double> weights; // M_1..M_{p+q}
    std::vector<double> mu;
    std::vector<std::vector<double>> ar;         // [lag][t]
    std::vector<std::vector<double>> ch;         // [lag][t]
    std::vector<std::vector<double>> ar_profile; // a_i / M_i
    std::vector<std::vector<double>> ch_profile; // b_k / M_{p+k}
};

/// Precomputed designs at x_t = t/T; evaluates coefficient and intensity paths quickly.
class ModelEvaluator {
public:
    ModelEvaluator(const ModelSpec& spec, std::size_t T);

    const ModelSpec& spec() const noexcept { return spec_; }
    std::size_t length() const noexcept { return T_; }
    const BasisDesign& mu_design() const noexcept { return mu_design_; }
    const BasisDesign& ar_design() const noexcept { return ar_design_; }
    const BasisDesign& ch_design() const noexcept { return ch_design_; }

    CoefficientPaths coefficient_paths(const ParamState& state) const;
    std::vector<double> intensity(const ParamState& state, const CountSeries& series,
                                  const CoefficientPaths& paths) const;
    std::vector<double> intensity(const ParamState& state, const CountSeries& series) const;

private:
    ModelSpec spec_;
    std::size_t T_;
    BasisDesign mu_design_;
    BasisDesign ar_design_;
    BasisDesign ch_design_;
};

/// lambda_1..lambda_T. Pre-sample counts are 0; the CH lag reaching t = 0 uses
/// state.lambda0 and lags reaching t < 0 contribute 0.
std::vector<double> intensity_path(const ParamState& state, const ModelSpec& spec, const CountSeries& series);

struct ConstraintReport {
    double max_coef_sum = 0.0; // sup over grid of sum_i a_i(x) + sum_k b_k(x)
    double min_mu = 0.0;
    double min_coef = 0.0;     // smallest a_i(x) or b_k(x) on the grid
    double min_slack = 0.0;    // inf over grid of 1 - sum, computed without cancellation
    bool pass = false;
};

/// `pass` needs min_mu > 0, min_coef >= 0 and min_slack > 0. The slack test is the sum < 1 test,
/// but stays exact when the softmax slack weight is below machine epsilon.
ConstraintReport check_constraints(const ParamState& state, const ModelSpec& spec, std::size_t grid_size);

} // namespace tvcount
