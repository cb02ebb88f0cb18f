#include "deconlab/errors.hpp"
#include "deconlab/factor_models.hpp"
#include "deconlab/rng.hpp"
#include "internal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace deconlab::factor {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kVarianceFloor = 1e-6;  // relative to the column variance

// Log joint density log(pi_k N(x_i | mu_k, diag(var))), n x k.
MatrixXd log_joint(const MixtureMapping& mm, const MatrixXd& x) {
  const Index n = x.rows();
  const Index k = mm.means.rows();
  const Eigen::ArrayXd inv_var = mm.variances.array().inverse();
  const double log_norm =
      -0.5 * (static_cast<double>(x.cols()) * std::log(2.0 * std::numbers::pi) + mm.variances.array().log().sum());
  MatrixXd lj(n, k);
  for (Index c = 0; c < k; ++c) {
    const MatrixXd diff = x.rowwise() - mm.means.row(c);
    const VectorXd quad = (diff.array().square().rowwise() * inv_var.transpose()).rowwise().sum();
    const double lw = mm.weights[c] > 0.0 ? std::log(mm.weights[c]) : -std::numeric_limits<double>::infinity();
    lj.col(c) = (lw + log_norm - 0.5 * quad.array()).matrix();
  }
  return lj;
}

// Row-wise log-sum-exp and normalized responsibilities.
VectorXd normalize_rows(const MatrixXd& lj, MatrixXd* resp) {
  const Index n = lj.rows();
  VectorXd lse(n);
  if (resp) resp->resize(n, lj.cols());
  for (Index i = 0; i < n; ++i) {
    const double mx = lj.row(i).maxCoeff();
    const double s = (lj.row(i).array() - mx).exp().sum();
    lse[i] = mx + std::log(s);
    if (resp) resp->row(i) = (lj.row(i).array() - lse[i]).exp().matrix();
  }
  return lse;
}

// k-means++ seeding: first centre uniform over rows, then proportional to squared distance.
MatrixXd seed_centres(const MatrixXd& x, std::size_t k, std::uint64_t seed) {
  RandomStream rs(seed);
  const Index n = x.rows();
  MatrixXd centres(static_cast<Index>(k), x.cols());
  centres.row(0) = x.row(static_cast<Index>(rs.below(static_cast<std::uint64_t>(n))));
  VectorXd d2 = (x.rowwise() - centres.row(0)).rowwise().squaredNorm();
  for (std::size_t c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double u = rs.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        cum += d2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rs.below(static_cast<std::uint64_t>(n)));
    }
    centres.row(static_cast<Index>(c)) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centres.row(static_cast<Index>(c))).rowwise().squaredNorm());
  }
  return centres;
}

struct MixtureRun {
  MixtureMapping mapping;
  std::vector<double> trace;
  std::size_t iterations = 0;
  bool converged = false;
};

MixtureRun run_em(const MatrixXd& x, const FactorModelSpec& spec, std::uint64_t seed) {
  const Index n = x.rows();
  const Index m = x.cols();
  const Index k = static_cast<Index>(spec.k);
  const VectorXd col_mean = x.colwise().mean().transpose();
  const VectorXd col_var = (x.rowwise() - col_mean.transpose()).array().square().colwise().mean().transpose();
  VectorXd floor(m);
  for (Index j = 0; j < m; ++j) floor[j] = std::max(kVarianceFloor * col_var[j], 1e-12);

  MixtureRun run;
  run.mapping.weights = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  run.mapping.means = seed_centres(x, spec.k, seed);
  run.mapping.variances = col_var.cwiseMax(floor);

  MatrixXd resp;
  run.trace.push_back(normalize_rows(log_joint(run.mapping, x), &resp).sum());
  for (std::size_t it = 0; it < spec.max_iters; ++it) {
    // M-step from the current responsibilities.
    const VectorXd mass = resp.colwise().sum().transpose();
    MixtureMapping next = run.mapping;
    next.weights = mass / static_cast<double>(n);
    for (Index c = 0; c < k; ++c) {
      if (mass[c] > 0.0) next.means.row(c) = (resp.col(c).transpose() * x) / mass[c];
    }
    VectorXd var = VectorXd::Zero(m);
    for (Index c = 0; c < k; ++c) {
      const MatrixXd diff = x.rowwise() - next.means.row(c);
      var += (diff.array().square().colwise() * resp.col(c).array()).colwise().sum().matrix().transpose();
    }
    next.variances = (var / static_cast<double>(n)).cwiseMax(floor);
    run.mapping = next;

    const double ll = normalize_rows(log_joint(run.mapping, x), &resp).sum();
    const double prev = run.trace.back();
    run.trace.push_back(ll);
    run.iterations = it + 1;
    if (std::abs(ll - prev) < spec.rel_tol * std::abs(prev)) {
      run.converged = true;
      break;
    }
  }
  return run;
}

bool has_empty_component(const MixtureMapping& mm, std::size_t n) {
  return (mm.weights.array() < 1.0 / static_cast<double>(n)).any();
}

}  // namespace

SubstituteConfounder fit_mixture(const MatrixXd& causes, const FactorModelSpec& spec) {
  if (spec.family != Family::mixture) throw ConfigError("fit_mixture called with a non-mixture spec");
  if (spec.k < 1) throw ConfigError("mixture needs k >= 1");
  if (!(spec.rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");
  const std::size_t n = static_cast<std::size_t>(causes.rows());
  if (n < spec.k) throw ConfigError("mixture needs at least k units");
  if (causes.cols() < 1) throw ConfigError("mixture needs at least one cause column");

  MixtureRun run = run_em(causes, spec, spec.init_seed);
  SubstituteConfounder out;
  out.family = Family::mixture;
  out.k = spec.k;
  if (has_empty_component(run.mapping, n)) {
    out.diagnostics.reseeded = true;
    run = run_em(causes, spec, mix64(spec.init_seed, 1));
    if (has_empty_component(run.mapping, n)) {
      out.diagnostics.warnings.push_back("mixture: degenerate fit, a component holds less than 1/n of the mass");
    }
  }
  out.diagnostics.iterations = run.iterations;
  out.diagnostics.converged = run.converged;
  if (!run.converged) out.diagnostics.warnings.push_back("mixture: max_iters reached before convergence");
  out.loglik_trace = std::move(run.trace);
  out.mapping = run.mapping;
  out.zhat = evaluate(out.mapping, causes);
  return out;
}

std::vector<std::size_t> hard_assignments(const MatrixXd& responsibilities) {
  std::vector<std::size_t> out(static_cast<std::size_t>(responsibilities.rows()), 0);
  for (Index i = 0; i < responsibilities.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < responsibilities.cols(); ++c) {
      if (responsibilities(i, c) > responsibilities(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

Eigen::MatrixXd mixture_responsibilities(const MixtureMapping& mm, const MatrixXd& x) {
  MatrixXd resp;
  normalize_rows(log_joint(mm, x), &resp);
  return resp;
}

Eigen::VectorXd mixture_row_loglik(const MixtureMapping& mm, const MatrixXd& x) {
  return normalize_rows(log_joint(mm, x), nullptr);
}

}  // namespace deconlab::factor
