#include "deconlab/errors.hpp"
#include "deconlab/factor_models.hpp"
#include "deconlab/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace deconlab::factor {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

IndependenceReport independence_check(const MatrixXd& causes, const MatrixXd& zhat, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (zhat.rows() != causes.rows()) throw ConfigError("causes and zhat have different row counts");
  const std::size_t n = static_cast<std::size_t>(causes.rows());
  const std::size_t m = static_cast<std::size_t>(causes.cols());
  if (n <= static_cast<std::size_t>(zhat.cols()) + 3) throw ConfigError("independence check needs n > k + 3");

  IndependenceReport rep;
  rep.alpha = alpha;
  const std::vector<std::size_t> kept = stats::independent_columns(zhat);
  for (Index c = 0; c < zhat.cols(); ++c) {
    if (std::find(kept.begin(), kept.end(), static_cast<std::size_t>(c)) == kept.end()) {
      rep.dropped_zhat_columns.push_back(static_cast<std::size_t>(c));
    }
  }
  if (!rep.dropped_zhat_columns.empty()) {
    rep.note = "dropped " + std::to_string(rep.dropped_zhat_columns.size()) +
               " zhat column(s) that are constant or collinear with earlier columns";
  }
  MatrixXd cond(zhat.rows(), static_cast<Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) cond.col(static_cast<Index>(c)) = zhat.col(static_cast<Index>(kept[c]));
  const MatrixXd resid = stats::residualize(causes, cond);

  const std::size_t n_pairs = m * (m - 1) / 2;
  rep.bonferroni_level = n_pairs > 0 ? alpha / static_cast<double>(n_pairs) : alpha;
  rep.partial_correlations = MatrixXd::Identity(static_cast<Index>(m), static_cast<Index>(m));
  rep.p_values = MatrixXd::Zero(static_cast<Index>(m), static_cast<Index>(m));
  VectorXd norms(static_cast<Index>(m));
  for (Index j = 0; j < static_cast<Index>(m); ++j) norms[j] = resid.col(j).norm();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const Index a = static_cast<Index>(i);
      const Index b = static_cast<Index>(j);
      PairStatistic ps{i, j, 0.0, 0.0, 1.0};
      // A residual that vanishes (up to rounding) carries no variation to correlate.
      const double scale_a = causes.col(a).norm();
      const double scale_b = causes.col(b).norm();
      if (norms[a] > 1e-12 * scale_a && norms[b] > 1e-12 * scale_b) {
        ps.partial_correlation = std::clamp(resid.col(a).dot(resid.col(b)) / (norms[a] * norms[b]), -1.0, 1.0);
        std::tie(ps.z, ps.p_value) = stats::fisher_z_test(ps.partial_correlation, n, kept.size());
      }
      rep.partial_correlations(a, b) = rep.partial_correlations(b, a) = ps.partial_correlation;
      rep.p_values(a, b) = rep.p_values(b, a) = ps.p_value;
      rep.max_abs_partial_correlation = std::max(rep.max_abs_partial_correlation, std::abs(ps.partial_correlation));
      if (ps.p_value < rep.bonferroni_level) rep.renders_independent = false;
      rep.pairs.push_back(ps);
    }
  }
  return rep;
}

PredictiveScore heldout_predictive_check(const MatrixXd& train, const MatrixXd& test, const FactorModelSpec& spec) {
  if (train.cols() != test.cols()) throw ConfigError("train and test have different numbers of causes");
  if (test.rows() < 1) throw ConfigError("held-out check needs at least one test row");
  const SubstituteConfounder sub = fit(train, spec);
  const double m = static_cast<double>(train.cols());
  auto score = [&](const MatrixXd& x) {
    const VectorXd ll = row_loglik(sub.mapping, x) / m;
    return stats::mean_and_se(std::vector<double>(ll.data(), ll.data() + ll.size()));
  };
  PredictiveScore out;
  std::tie(out.heldout, out.heldout_se) = score(test);
  std::tie(out.train, out.train_se) = score(train);
  return out;
}

}  // namespace deconlab::factor
