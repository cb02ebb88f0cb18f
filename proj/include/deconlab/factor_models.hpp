#pragma once

// Latent-variable models of the causes alone. Every fit returns a
// SubstituteConfounder whose zhat rows are a deterministic function of the
// corresponding cause rows: zhat = evaluate(mapping, causes).

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace deconlab::factor {

enum class Family { ppca, poisson_mf, mixture };

std::string_view to_string(Family family);
Family family_from_string(std::string_view text);

struct FactorModelSpec {
  Family family = Family::ppca;
  std::size_t k = 1;
  std::size_t max_iters = 2000;
  double rel_tol = 1e-8;
  std::uint64_t init_seed = 0;
  /// PPCA only: z-score the cause columns before fitting.
  bool standardize = true;
};

/// Gaussian factor model a = W z + mu + eps, eps ~ N(0, sigma2 I), fitted on
/// (a - mean) / scale.
struct PpcaMapping {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::MatrixXd loadings;  // m x k
  double sigma2 = 1.0;
};

/// k-component gaussian mixture with one diagonal covariance shared by all components.
struct MixtureMapping {
  Eigen::VectorXd weights;    // k
  Eigen::MatrixXd means;      // k x m
  Eigen::VectorXd variances;  // m
};

/// Poisson factorization A ~ Poisson(Theta B^T). A new row is mapped to its
/// Theta row by multiplicative updates with B fixed, from a fixed start.
struct PoissonMapping {
  Eigen::MatrixXd loadings;  // B, m x k
  std::size_t fold_in_iters = 1000;
  double fold_in_tol = 1e-12;
};

using Mapping = std::variant<PpcaMapping, MixtureMapping, PoissonMapping>;

/// E[Z | A = a] (ppca, poisson-mf) or posterior cluster probabilities (mixture), one row per input row.
Eigen::MatrixXd evaluate(const Mapping& mapping, const Eigen::MatrixXd& causes);

/// Per-row log-likelihood of the causes under the fitted model (original units).
Eigen::VectorXd row_loglik(const Mapping& mapping, const Eigen::MatrixXd& causes);

struct FitDiagnostics {
  std::size_t iterations = 0;
  bool converged = false;
  bool reseeded = false;
  std::vector<std::string> warnings;
};

struct SubstituteConfounder {
  Family family = Family::ppca;
  std::size_t k = 0;
  Eigen::MatrixXd zhat;  // n x k
  Mapping mapping;
  std::vector<double> loglik_trace;
  FitDiagnostics diagnostics;
};

SubstituteConfounder fit_ppca(const Eigen::MatrixXd& causes, const FactorModelSpec& spec);
SubstituteConfounder fit_mixture(const Eigen::MatrixXd& causes, const FactorModelSpec& spec);
SubstituteConfounder fit_poisson_mf(const Eigen::MatrixXd& causes, const FactorModelSpec& spec);
/// Dispatches on spec.family.
SubstituteConfounder fit(const Eigen::MatrixXd& causes, const FactorModelSpec& spec);

/// Largest-responsibility component per row; ties go to the lower index.
std::vector<std::size_t> hard_assignments(const Eigen::MatrixXd& responsibilities);

/// True when every step of the trace is non-decreasing up to `slack` relative to the previous value.
bool is_monotone(const std::vector<double>& trace, double slack = 1e-9);

// ---- diagnostics ----------------------------------------------------------

struct PairStatistic {
  std::size_t i = 0;
  std::size_t j = 0;
  double partial_correlation = 0.0;
  double z = 0.0;
  double p_value = 1.0;
};

struct IndependenceReport {
  std::vector<PairStatistic> pairs;
  Eigen::MatrixXd partial_correlations;  // m x m, symmetric, unit diagonal
  Eigen::MatrixXd p_values;              // m x m, symmetric, zero diagonal
  double max_abs_partial_correlation = 0.0;
  double alpha = 0.05;
  double bonferroni_level = 0.05;
  bool renders_independent = true;
  std::vector<std::size_t> dropped_zhat_columns;
  std::string note;
};

/// Pairwise partial correlations of the causes given [1 | zhat] with Fisher-z
/// p-values; "renders independent" iff no pair rejects at alpha / #pairs.
IndependenceReport independence_check(const Eigen::MatrixXd& causes, const Eigen::MatrixXd& zhat, double alpha);

struct PredictiveScore {
  double heldout = 0.0;     // mean per-entry log-likelihood of the test rows
  double heldout_se = 0.0;  // over test rows
  double train = 0.0;
  double train_se = 0.0;
};

/// Fits on train, scores both train and test rows. A report column, not a validity gate.
PredictiveScore heldout_predictive_check(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test,
                                         const FactorModelSpec& spec);

// ---- persistence ----------------------------------------------------------

/// {"family", "k", "parameters", "loglik_trace", "diagnostics"}
nlohmann::json to_json(const SubstituteConfounder& sub);
/// Mapping from a document written by to_json.
Mapping mapping_from_json(const nlohmann::json& doc);

}  // namespace deconlab::factor
