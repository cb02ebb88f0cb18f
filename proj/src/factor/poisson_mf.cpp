#include "deconlab/errors.hpp"
#include "deconlab/factor_models.hpp"
#include "deconlab/rng.hpp"
#include "internal.hpp"

#include <cmath>

namespace deconlab::factor {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_counts(const MatrixXd& x) {
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
        throw ConfigError("poisson-mf needs non-negative integer counts; entry (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is " + std::to_string(v));
      }
    }
  }
}

// x / rate with 0 / 0 taken as 0.
MatrixXd ratio(const MatrixXd& x, const MatrixXd& rate) {
  MatrixXd r(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) r(i, j) = x(i, j) > 0.0 ? x(i, j) / rate(i, j) : 0.0;
  }
  return r;
}

}  // namespace

VectorXd poisson_row_loglik(const MatrixXd& x, const MatrixXd& rate) {
  VectorXd out = VectorXd::Zero(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      if (v > 0.0) s += v * std::log(rate(i, j)) - std::lgamma(v + 1.0);
      s -= rate(i, j);
    }
    out[i] = s;
  }
  return out;
}

MatrixXd poisson_fold_in(const PoissonMapping& pm, const MatrixXd& x) {
  check_counts(x);
  const MatrixXd& b = pm.loadings;
  const Index k = b.cols();
  const VectorXd col_mass = b.colwise().sum().transpose();
  const double total_b = col_mass.sum();
  MatrixXd theta = MatrixXd::Zero(x.rows(), k);
  for (Index i = 0; i < x.rows(); ++i) {
    const double total_x = x.row(i).sum();
    if (total_x == 0.0 || total_b <= 0.0) continue;
    VectorXd t = VectorXd::Constant(k, total_x / total_b);
    for (std::size_t it = 0; it < pm.fold_in_iters; ++it) {
      const VectorXd rate = b * t;
      VectorXd r(x.cols());
      for (Index j = 0; j < x.cols(); ++j) r[j] = x(i, j) > 0.0 ? x(i, j) / rate[j] : 0.0;
      VectorXd next = t;
      for (Index c = 0; c < k; ++c) {
        if (col_mass[c] > 0.0) next[c] = t[c] * b.col(c).dot(r) / col_mass[c];
      }
      const double change = (next - t).cwiseAbs().maxCoeff();
      const double scale = t.cwiseAbs().maxCoeff();
      t = next;
      if (change <= pm.fold_in_tol * scale) break;
    }
    theta.row(i) = t.transpose();
  }
  return theta;
}

SubstituteConfounder fit_poisson_mf(const MatrixXd& causes, const FactorModelSpec& spec) {
  if (spec.family != Family::poisson_mf) throw ConfigError("fit_poisson_mf called with a non-poisson-mf spec");
  if (spec.k < 1) throw ConfigError("poisson-mf needs k >= 1");
  if (!(spec.rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");
  check_counts(causes);

  const Index n = causes.rows();
  const Index m = causes.cols();
  const Index k = static_cast<Index>(spec.k);
  SubstituteConfounder out;
  out.family = Family::poisson_mf;
  out.k = spec.k;

  PoissonMapping pm;
  const double mean = n * m > 0 ? causes.mean() : 0.0;
  if (mean == 0.0) {
    pm.loadings = MatrixXd::Zero(m, k);
    out.loglik_trace.push_back(0.0);
    out.diagnostics.converged = true;
    out.mapping = pm;
    out.zhat = MatrixXd::Zero(n, k);
    return out;
  }

  RandomStream rs(spec.init_seed);
  const double scale = std::sqrt(mean / static_cast<double>(k));
  MatrixXd theta(n, k);
  MatrixXd b(m, k);
  for (Index c = 0; c < k; ++c) {
    for (Index i = 0; i < n; ++i) theta(i, c) = scale * rs.uniform(0.5, 1.5);
    for (Index j = 0; j < m; ++j) b(j, c) = scale * rs.uniform(0.5, 1.5);
  }

  out.loglik_trace.push_back(poisson_row_loglik(causes, theta * b.transpose()).sum());
  for (std::size_t it = 0; it < spec.max_iters; ++it) {
    {
      const MatrixXd r = ratio(causes, theta * b.transpose());
      const VectorXd mass = b.colwise().sum().transpose();
      const MatrixXd num = r * b;  // n x k
      for (Index c = 0; c < k; ++c) {
        if (mass[c] > 0.0) theta.col(c) = theta.col(c).cwiseProduct(num.col(c)) / mass[c];
      }
    }
    {
      const MatrixXd r = ratio(causes, theta * b.transpose());
      const VectorXd mass = theta.colwise().sum().transpose();
      const MatrixXd num = r.transpose() * theta;  // m x k
      for (Index c = 0; c < k; ++c) {
        if (mass[c] > 0.0) b.col(c) = b.col(c).cwiseProduct(num.col(c)) / mass[c];
      }
    }
    const double ll = poisson_row_loglik(causes, theta * b.transpose()).sum();
    const double prev = out.loglik_trace.back();
    out.loglik_trace.push_back(ll);
    out.diagnostics.iterations = it + 1;
    if (std::abs(ll - prev) < spec.rel_tol * std::abs(prev)) {
      out.diagnostics.converged = true;
      break;
    }
  }
  if (!out.diagnostics.converged) out.diagnostics.warnings.push_back("poisson-mf: max_iters reached before convergence");

  pm.loadings = b;
  out.mapping = pm;
  out.zhat = evaluate(out.mapping, causes);
  return out;
}

}  // namespace deconlab::factor
