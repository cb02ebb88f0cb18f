#include "deconlab/estimators.hpp"

#include "deconlab/linear_model.hpp"
#include "deconlab/rng.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace deconlab::estimate {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<std::string> Estimand::subset() const {
  std::vector<std::string> out;
  for (const auto& [name, value] : a.assignments) out.push_back(name);
  return out;
}

std::string Estimand::label() const {
  std::string out = scm::to_string(a) + " - " + scm::to_string(a_prime);
  if (adjust_other_causes) out += " | others";
  return out;
}

Estimand unit_contrast(const std::vector<std::string>& subset, bool adjust_other_causes) {
  if (subset.empty()) throw ConfigError("estimand needs at least one intervened cause");
  Estimand e;
  for (const auto& name : subset) {
    e.a.assignments[name] = 1.0;
    e.a_prime.assignments[name] = 0.0;
  }
  e.adjust_other_causes = adjust_other_causes;
  return e;
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::naive: return "naive";
    case EstimatorKind::oracle_adjusted: return "oracle-adjusted";
    case EstimatorKind::substitute_adjusted: return "substitute-adjusted";
  }
  return "?";
}

Covariates observed_covariates(const scm::Dataset& data, const std::vector<std::string>& names) {
  Covariates cov{names, MatrixXd(static_cast<Index>(data.n), static_cast<Index>(names.size()))};
  for (std::size_t j = 0; j < names.size(); ++j) {
    VectorXd col;
    bool found = false;
    for (std::size_t c = 0; c < data.cause_names.size(); ++c) {
      if (data.cause_names[c] == names[j]) {
        col = data.causes.col(static_cast<Index>(c));
        found = true;
      }
    }
    if (!found) col = data.extra_column(names[j]);
    cov.values.col(static_cast<Index>(j)) = col;
  }
  return cov;
}

Covariates full_covariates(const scm::FullData& full, const std::vector<std::string>& names) {
  return {names, full.columns_named(names)};
}

void set_truth(EffectEstimate& est, double truth) {
  est.truth = truth;
  est.bias = est.point - truth;
}

std::string CollinearityReport::to_string() const {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", condition_number);
  os << "design [";
  for (std::size_t j = 0; j < columns.size(); ++j) os << (j ? ", " : "") << columns[j];
  os << "] condition number " << buf;
  std::snprintf(buf, sizeof buf, "%.3g", threshold);
  os << (rank_deficient ? " exceeds " : " within ") << buf;
  if (rank_deficient) os << " (rank deficient)";
  return os.str();
}

CollinearityError::CollinearityError(CollinearityReport report)
    : DegenerateInputError("collinear outcome-model design: " + report.to_string()), report_(std::move(report)) {}

namespace {

struct Design {
  std::vector<std::string> names;
  std::vector<Index> subset_cols;  // columns of data.causes in S
  std::vector<Index> other_cols;   // columns of data.causes adjusted for
};

Design plan_design(const scm::Dataset& data, const Covariates& cov, const Estimand& est, bool interactions) {
  if (cov.values.rows() != static_cast<Index>(data.n)) throw ConfigError("covariates are not row-aligned with the data");
  if (static_cast<Index>(cov.names.size()) != cov.values.cols()) throw ConfigError("covariate names and columns differ");
  for (const auto& [name, value] : est.a_prime.assignments) {
    if (!est.a.assignments.count(name)) throw ConfigError("contrast sides intervene on different causes");
  }
  if (est.a.assignments.size() != est.a_prime.assignments.size()) {
    throw ConfigError("contrast sides intervene on different causes");
  }
  Design d;
  d.names.push_back("1");
  std::vector<bool> in_s(data.m, false);
  for (const auto& name : est.subset()) {
    const std::size_t j = data.cause_index(name);
    in_s[j] = true;
    d.subset_cols.push_back(static_cast<Index>(j));
    d.names.push_back(name);
  }
  if (est.adjust_other_causes) {
    for (std::size_t j = 0; j < data.m; ++j) {
      if (in_s[j]) continue;
      d.other_cols.push_back(static_cast<Index>(j));
      d.names.push_back(data.cause_names[j]);
    }
  }
  for (const auto& name : cov.names) d.names.push_back(name);
  if (interactions) {
    for (Index s : d.subset_cols) {
      for (const auto& name : cov.names) d.names.push_back(data.cause_names[static_cast<std::size_t>(s)] + "*" + name);
    }
  }
  return d;
}

// Design matrix with the S columns taken from `s_values` (n x |S|).
MatrixXd build(const scm::Dataset& data, const Covariates& cov, const Design& d, const MatrixXd& s_values,
               bool interactions) {
  const Index n = static_cast<Index>(data.n);
  const Index ns = static_cast<Index>(d.subset_cols.size());
  const Index no = static_cast<Index>(d.other_cols.size());
  const Index nc = cov.values.cols();
  MatrixXd x(n, static_cast<Index>(d.names.size()));
  x.col(0).setOnes();
  Index c = 1;
  for (Index s = 0; s < ns; ++s) x.col(c++) = s_values.col(s);
  for (Index o = 0; o < no; ++o) x.col(c++) = data.causes.col(d.other_cols[static_cast<std::size_t>(o)]);
  for (Index j = 0; j < nc; ++j) x.col(c++) = cov.values.col(j);
  if (interactions) {
    for (Index s = 0; s < ns; ++s) {
      for (Index j = 0; j < nc; ++j) x.col(c++) = s_values.col(s).cwiseProduct(cov.values.col(j));
    }
  }
  return x;
}

MatrixXd subset_values(const scm::Dataset& data, const Design& d) {
  MatrixXd s(static_cast<Index>(data.n), static_cast<Index>(d.subset_cols.size()));
  for (std::size_t j = 0; j < d.subset_cols.size(); ++j) s.col(static_cast<Index>(j)) = data.causes.col(d.subset_cols[j]);
  return s;
}

MatrixXd constant_subset(const scm::Dataset& data, const Design& d, const scm::Intervention& iv) {
  MatrixXd s(static_cast<Index>(data.n), static_cast<Index>(d.subset_cols.size()));
  for (std::size_t j = 0; j < d.subset_cols.size(); ++j) {
    const std::string& name = data.cause_names[static_cast<std::size_t>(d.subset_cols[j])];
    s.col(static_cast<Index>(j)).setConstant(iv.assignments.at(name));
  }
  return s;
}

std::vector<double> variance_inflation(const MatrixXd& x) {
  std::vector<double> out;
  const Index p = x.cols();
  for (Index j = 1; j < p; ++j) {
    MatrixXd others(x.rows(), p - 2);
    Index c = 0;
    for (Index k = 1; k < p; ++k) {
      if (k != j) others.col(c++) = x.col(k);
    }
    const VectorXd col = x.col(j);
    const double tss = (col.array() - col.mean()).square().sum();
    if (tss == 0.0) {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double rss = stats::residualize(col, others).squaredNorm();
    out.push_back(rss > 0.0 ? tss / rss : std::numeric_limits<double>::infinity());
  }
  return out;
}

CollinearityReport report_for(const MatrixXd& x, const Design& d, double threshold, bool with_vif) {
  CollinearityReport rep;
  rep.columns = d.names;
  rep.threshold = threshold;
  rep.condition_number = stats::condition_number(x);
  rep.rank_deficient = !(rep.condition_number <= threshold);
  if (with_vif) rep.variance_inflation = variance_inflation(x);
  return rep;
}

VectorXd solve(const MatrixXd& x, const VectorXd& y) { return x.colPivHouseholderQr().solve(y); }

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "+" : "") + names[i];
  return out;
}

}  // namespace

CollinearityReport collinearity_report(const scm::Dataset& data, const Covariates& covariates,
                                       const Estimand& estimand, const EstimatorOptions& options) {
  const Design d = plan_design(data, covariates, estimand, options.interactions);
  const MatrixXd x = build(data, covariates, d, subset_values(data, d), options.interactions);
  return report_for(x, d, options.collinearity_threshold, true);
}

EffectEstimate estimate_adjusted(const scm::Dataset& data, const Covariates& covariates, const Estimand& estimand,
                                 const EstimatorOptions& options) {
  const Design d = plan_design(data, covariates, estimand, options.interactions);
  const MatrixXd x = build(data, covariates, d, subset_values(data, d), options.interactions);
  if (x.rows() <= x.cols()) throw ConfigError("outcome model needs more units than design columns");
  CollinearityReport rep = report_for(x, d, options.collinearity_threshold, false);
  if (rep.rank_deficient) {
    rep.variance_inflation = variance_inflation(x);
    throw CollinearityError(std::move(rep));
  }
  // Standardization over the empirical covariate distribution: the average
  // difference of fitted values is (mean design row under a - under a') . beta.
  const MatrixXd diff = build(data, covariates, d, constant_subset(data, d, estimand.a), options.interactions) -
                        build(data, covariates, d, constant_subset(data, d, estimand.a_prime), options.interactions);

  EffectEstimate est;
  est.estimand = estimand;
  est.estimator = covariates.names.empty() ? EstimatorKind::naive : EstimatorKind::oracle_adjusted;
  est.provenance = join_names(covariates.names);
  est.condition_number = rep.condition_number;
  const VectorXd beta = solve(x, data.outcome);
  est.point = diff.colwise().mean().dot(beta);

  if (options.bootstrap == 0) {
    est.se = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  const Index n = x.rows();
  std::vector<double> points;
  points.reserve(options.bootstrap);
  VectorXd w(n);
  for (std::size_t b = 0; b < options.bootstrap; ++b) {
    RandomStream rs(mix64(options.seed, b));
    w.setZero();
    for (Index i = 0; i < n; ++i) w[static_cast<Index>(rs.below(static_cast<std::uint64_t>(n)))] += 1.0;
    const VectorXd root = w.cwiseSqrt();
    const MatrixXd xw = x.array().colwise() * root.array();
    const VectorXd yw = data.outcome.cwiseProduct(root);
    const VectorXd bb = solve(xw, yw);
    const Eigen::RowVectorXd dbar = (w.transpose() * diff) / static_cast<double>(n);
    points.push_back(dbar.dot(bb));
  }
  double mean = 0.0;
  for (double p : points) mean += p;
  mean /= static_cast<double>(points.size());
  double ss = 0.0;
  for (double p : points) ss += (p - mean) * (p - mean);
  est.se = points.size() > 1 ? std::sqrt(ss / static_cast<double>(points.size() - 1)) : 0.0;
  return est;
}

EffectEstimate estimate_naive(const scm::Dataset& data, const Estimand& estimand, const EstimatorOptions& options) {
  return estimate_adjusted(data, Covariates{{}, MatrixXd(static_cast<Index>(data.n), 0)}, estimand, options);
}

Covariates substitute_covariates(const factor::SubstituteConfounder& sub) {
  MatrixXd z = sub.zhat;
  if (sub.family == factor::Family::mixture && z.cols() > 0) z = z.leftCols(z.cols() - 1).eval();
  Covariates cov;
  std::vector<Index> keep;
  for (Index j = 0; j < z.cols(); ++j) {
    const double lo = z.col(j).minCoeff();
    const double hi = z.col(j).maxCoeff();
    if (hi > lo) keep.push_back(j);
  }
  cov.values.resize(z.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    cov.values.col(static_cast<Index>(c)) = z.col(keep[c]);
    cov.names.push_back("zhat" + std::to_string(keep[c] + 1));
  }
  return cov;
}

EffectEstimate estimate_substitute(const scm::Dataset& data, const factor::SubstituteConfounder& sub,
                                   const Estimand& estimand, const EstimatorOptions& options) {
  if (sub.zhat.rows() != static_cast<Index>(data.n)) throw ConfigError("substitute confounder was fit on other data");
  EffectEstimate est = estimate_adjusted(data, substitute_covariates(sub), estimand, options);
  est.estimator = EstimatorKind::substitute_adjusted;
  est.provenance = std::string(factor::to_string(sub.family)) + " k=" + std::to_string(sub.k);
  return est;
}

}  // namespace deconlab::estimate
