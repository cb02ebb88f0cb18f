#pragma once

// Effect estimators (naive, covariate-adjusted, substitute-adjusted) and the
// diagnostics that go with them.

#include "deconlab/errors.hpp"
#include "deconlab/factor_models.hpp"
#include "deconlab/scm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace deconlab::estimate {

/// Contrast E[Y(a)] - E[Y(a')] for the causes named in `a` (the subset S).
/// With adjust_other_causes the causes outside S enter the outcome model.
struct Estimand {
  scm::Intervention a;
  scm::Intervention a_prime;
  bool adjust_other_causes = false;

  std::vector<std::string> subset() const;
  /// "do(A_1=1) - do(A_1=0)", with " | others" appended when other causes are adjusted for.
  std::string label() const;
};

/// Unit contrast do(S = 1) vs do(S = 0).
Estimand unit_contrast(const std::vector<std::string>& subset, bool adjust_other_causes = false);

enum class EstimatorKind { naive, oracle_adjusted, substitute_adjusted };
std::string to_string(EstimatorKind kind);

struct Covariates {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // n x names.size()
};

/// Named columns of data.extra.
Covariates observed_covariates(const scm::Dataset& data, const std::vector<std::string>& names);
/// Named columns of the full data, latent ones included (oracle adjustment).
Covariates full_covariates(const scm::FullData& full, const std::vector<std::string>& names);

struct EstimatorOptions {
  std::size_t bootstrap = 200;  // 0 disables the bootstrap; se is then NaN
  std::uint64_t seed = 0;
  bool interactions = false;  // add S x covariate products to the outcome model
  double collinearity_threshold = 1e10;
};

struct EffectEstimate {
  Estimand estimand;
  EstimatorKind estimator = EstimatorKind::naive;
  std::string provenance;  // covariate set or factor-model family and k
  double point = 0.0;
  double se = 0.0;
  double truth = 0.0;
  double bias = 0.0;
  std::size_t replicates = 1;
  double condition_number = 1.0;  // of the column-normalized outcome-model design
};

/// Sets truth and bias = point - truth.
void set_truth(EffectEstimate& est, double truth);

struct CollinearityReport {
  std::vector<std::string> columns;  // design columns, intercept first
  double condition_number = 1.0;
  bool rank_deficient = false;
  std::vector<double> variance_inflation;  // per non-intercept column
  double threshold = 1e10;

  std::string to_string() const;
};

class CollinearityError : public DegenerateInputError {
 public:
  explicit CollinearityError(CollinearityReport report);
  const CollinearityReport& report() const noexcept { return report_; }

 private:
  CollinearityReport report_;
};

/// Diagnostics of the outcome-model design for the given covariates.
CollinearityReport collinearity_report(const scm::Dataset& data, const Covariates& covariates,
                                       const Estimand& estimand, const EstimatorOptions& options = {});

EffectEstimate estimate_adjusted(const scm::Dataset& data, const Covariates& covariates, const Estimand& estimand,
                                 const EstimatorOptions& options = {});

EffectEstimate estimate_naive(const scm::Dataset& data, const Estimand& estimand,
                              const EstimatorOptions& options = {});

/// Covariates derived from zhat: mixture responsibilities lose their last
/// (redundant) column, constant columns are dropped.
Covariates substitute_covariates(const factor::SubstituteConfounder& sub);

EffectEstimate estimate_substitute(const scm::Dataset& data, const factor::SubstituteConfounder& sub,
                                   const Estimand& estimand, const EstimatorOptions& options = {});

// ---- diagnostics ----------------------------------------------------------

struct OverlapReport {
  std::vector<std::string> strata;          // stratum labels
  std::vector<std::string> configurations;  // cause-value configuration labels
  Eigen::MatrixXi counts;                   // strata x configurations
  std::vector<std::size_t> stratum_occupancy;
  std::size_t min_stratum_occupancy = 0;
  std::size_t empty_strata = 0;
  bool pass = true;
  std::string witness;  // first empty cell in a well-populated stratum
};

OverlapReport overlap_diagnostic(const scm::Dataset& data, const factor::SubstituteConfounder& sub,
                                 const std::vector<std::string>& k_subset, std::size_t bins = 4);

struct CiColumn {
  double partial_correlation = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
};

struct CiTestResult {
  std::vector<CiColumn> columns;
  double statistic = 0.0;  // largest |z| over non-degenerate columns
  double p_value = 1.0;    // Bonferroni-combined; NaN when degenerate
  std::string verdict;     // "independent", "dependent" or "degenerate: collinear"
};

/// Tests y independent of each z column given [1 | conditioning].
CiTestResult ci_test(const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const Eigen::MatrixXd& conditioning,
                     double alpha);

}  // namespace deconlab::estimate
