#include "deconlab/estimators.hpp"

#include "deconlab/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace deconlab::estimate {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Discretized {
  std::vector<std::size_t> level;  // per unit
  std::vector<std::string> labels;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Raw values when there are at most `bins` distinct ones, else quantile bins.
Discretized discretize(const VectorXd& x, std::size_t bins, const std::string& name) {
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  Discretized out;
  out.level.resize(static_cast<std::size_t>(x.size()));
  if (distinct.size() <= bins) {
    for (double v : distinct) out.labels.push_back(name + "=" + fmt(v));
    for (Index i = 0; i < x.size(); ++i) {
      out.level[static_cast<std::size_t>(i)] =
          static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), x[i]) - distinct.begin());
    }
    return out;
  }
  std::vector<double> cuts;
  for (std::size_t q = 1; q < bins; ++q) {
    const std::size_t pos = q * sorted.size() / bins;
    cuts.push_back(sorted[std::min(pos, sorted.size() - 1)]);
  }
  for (std::size_t b = 0; b < bins; ++b) out.labels.push_back(name + " bin " + std::to_string(b + 1) + "/" + std::to_string(bins));
  for (Index i = 0; i < x.size(); ++i) {
    // bin = number of cut points strictly below the value
    out.level[static_cast<std::size_t>(i)] =
        static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), x[i]) - cuts.begin());
  }
  return out;
}

// Row-major product of per-column levels.
Discretized product(const std::vector<Discretized>& parts, std::size_t n) {
  Discretized out;
  out.level.assign(n, 0);
  out.labels = {""};
  for (const auto& part : parts) {
    std::vector<std::string> labels;
    for (const auto& prefix : out.labels) {
      for (const auto& l : part.labels) labels.push_back(prefix.empty() ? l : prefix + ", " + l);
    }
    for (std::size_t i = 0; i < n; ++i) out.level[i] = out.level[i] * part.labels.size() + part.level[i];
    out.labels = std::move(labels);
  }
  return out;
}

}  // namespace

OverlapReport overlap_diagnostic(const scm::Dataset& data, const factor::SubstituteConfounder& sub,
                                 const std::vector<std::string>& k_subset, std::size_t bins) {
  if (bins < 2) throw ConfigError("overlap diagnostic needs at least 2 bins");
  if (k_subset.empty()) throw ConfigError("overlap diagnostic needs a non-empty cause subset");
  if (sub.zhat.rows() != static_cast<Index>(data.n)) throw ConfigError("substitute confounder was fit on other data");
  const std::size_t n = data.n;

  Discretized strata;
  if (sub.family == factor::Family::mixture) {
    const auto hard = factor::hard_assignments(sub.zhat);
    strata.level = hard;
    for (Index c = 0; c < sub.zhat.cols(); ++c) strata.labels.push_back("cluster " + std::to_string(c + 1));
  } else {
    std::vector<Discretized> parts;
    for (Index c = 0; c < sub.zhat.cols(); ++c) parts.push_back(discretize(sub.zhat.col(c), bins, "zhat" + std::to_string(c + 1)));
    strata = product(parts, n);
  }
  std::vector<Discretized> cause_parts;
  for (const auto& name : k_subset) {
    cause_parts.push_back(discretize(data.causes.col(static_cast<Index>(data.cause_index(name))), bins, name));
  }
  const Discretized configs = product(cause_parts, n);

  OverlapReport rep;
  rep.strata = strata.labels;
  rep.configurations = configs.labels;
  rep.counts = Eigen::MatrixXi::Zero(static_cast<Index>(strata.labels.size()), static_cast<Index>(configs.labels.size()));
  for (std::size_t i = 0; i < n; ++i) {
    rep.counts(static_cast<Index>(strata.level[i]), static_cast<Index>(configs.level[i])) += 1;
  }
  const double well_populated = static_cast<double>(n) / (10.0 * static_cast<double>(strata.labels.size()));
  rep.min_stratum_occupancy = std::numeric_limits<std::size_t>::max();
  for (Index s = 0; s < rep.counts.rows(); ++s) {
    const std::size_t occ = static_cast<std::size_t>(rep.counts.row(s).sum());
    rep.stratum_occupancy.push_back(occ);
    rep.min_stratum_occupancy = std::min(rep.min_stratum_occupancy, occ);
    if (occ == 0) ++rep.empty_strata;
    if (static_cast<double>(occ) < well_populated || occ == 0) continue;
    for (Index c = 0; c < rep.counts.cols(); ++c) {
      if (rep.counts(s, c) == 0 && rep.pass) {
        rep.pass = false;
        rep.witness = "no units with " + configs.labels[static_cast<std::size_t>(c)] + " in " +
                      strata.labels[static_cast<std::size_t>(s)] + " (" + std::to_string(occ) + " units)";
      }
    }
  }
  return rep;
}

CiTestResult ci_test(const VectorXd& y, const MatrixXd& z, const MatrixXd& conditioning, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const std::size_t n = static_cast<std::size_t>(y.size());
  if (z.rows() != y.size() || conditioning.rows() != y.size()) throw ConfigError("ci_test inputs are not row-aligned");
  if (n <= static_cast<std::size_t>(z.cols() + conditioning.cols()) + 3) {
    throw ConfigError("ci_test needs n > columns(z) + columns(conditioning) + 3");
  }
  CiTestResult out;
  const VectorXd ry = stats::residualize(y, conditioning);
  const MatrixXd rz = stats::residualize(z, conditioning);
  bool degenerate = false;
  double min_p = 1.0;
  for (Index j = 0; j < z.cols(); ++j) {
    CiColumn col;
    const double tss = (z.col(j).array() - z.col(j).mean()).square().sum();
    const double rss = rz.col(j).squaredNorm();
    if (tss == 0.0 || rss / tss < 1e-16) {
      col.degenerate = true;
      degenerate = true;
    } else {
      col.partial_correlation = stats::correlation(ry, rz.col(j));
      std::tie(col.z, col.p_value) =
          stats::fisher_z_test(col.partial_correlation, n, static_cast<std::size_t>(conditioning.cols()));
      out.statistic = std::max(out.statistic, std::abs(col.z));
      min_p = std::min(min_p, col.p_value);
    }
    out.columns.push_back(col);
  }
  if (degenerate) {
    out.p_value = std::numeric_limits<double>::quiet_NaN();
    out.verdict = "degenerate: collinear";
    return out;
  }
  out.p_value = std::min(1.0, min_p * static_cast<double>(std::max<Index>(z.cols(), 1)));
  out.verdict = out.p_value < alpha ? "dependent" : "independent";
  return out;
}

}  // namespace deconlab::estimate
