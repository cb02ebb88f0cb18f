#include "deconlab/errors.hpp"
#include "deconlab/factor_models.hpp"
#include "deconlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace deconlab::factor {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kSigmaFloor = 1e-10;  // relative to the mean column variance

struct PpcaState {
  MatrixXd w;
  double sigma2;
};

// Log-likelihood of the (standardized) data with sample covariance s,
// evaluated through k x k quantities only.
double ppca_loglik(const MatrixXd& s, double trace_s, const PpcaState& st, std::size_t n) {
  const Index m = s.rows();
  const Index k = st.w.cols();
  const MatrixXd mm = st.w.transpose() * st.w + st.sigma2 * MatrixXd::Identity(k, k);
  Eigen::LLT<MatrixXd> llt(mm);
  const double logdet_m = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_c = static_cast<double>(m - k) * std::log(st.sigma2) + logdet_m;
  const MatrixXd wsw = st.w.transpose() * s * st.w;
  const double tr = (trace_s - llt.solve(wsw).trace()) / st.sigma2;
  return -0.5 * static_cast<double>(n) *
         (static_cast<double>(m) * std::log(2.0 * std::numbers::pi) + logdet_c + tr);
}

}  // namespace

SubstituteConfounder fit_ppca(const MatrixXd& causes, const FactorModelSpec& spec) {
  if (spec.family != Family::ppca) throw ConfigError("fit_ppca called with a non-ppca spec");
  const std::size_t n = static_cast<std::size_t>(causes.rows());
  const std::size_t m = static_cast<std::size_t>(causes.cols());
  if (spec.k < 1) throw ConfigError("ppca needs k >= 1");
  if (spec.k >= m) {
    throw ConfigError("ppca needs k < m (k = " + std::to_string(spec.k) + ", m = " + std::to_string(m) + ")");
  }
  if (n <= spec.k) throw ConfigError("ppca needs more units than latent dimensions");
  if (!(spec.rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");

  PpcaMapping map;
  map.mean = causes.colwise().mean().transpose();
  map.scale = VectorXd::Ones(static_cast<Index>(m));
  for (Index j = 0; j < static_cast<Index>(m); ++j) {
    const double var = (causes.col(j).array() - map.mean[j]).square().sum() / static_cast<double>(n - 1);
    if (!(var > 0.0)) throw DegenerateInputError("cause column " + std::to_string(j) + " has zero variance");
    if (spec.standardize) map.scale[j] = std::sqrt(var);
  }
  MatrixXd y = causes.rowwise() - map.mean.transpose();
  y = y.array().rowwise() / map.scale.transpose().array();
  const MatrixXd s = (y.transpose() * y) / static_cast<double>(n);
  const double trace_s = s.trace();
  const double floor = kSigmaFloor * trace_s / static_cast<double>(m);

  RandomStream rs(spec.init_seed);
  const Index k = static_cast<Index>(spec.k);
  PpcaState st{MatrixXd(static_cast<Index>(m), k), trace_s / static_cast<double>(m)};
  for (Index c = 0; c < k; ++c) {
    for (Index r = 0; r < static_cast<Index>(m); ++r) st.w(r, c) = rs.normal();
  }
  st.w *= std::sqrt(trace_s / static_cast<double>(m));

  SubstituteConfounder out;
  out.family = Family::ppca;
  out.k = spec.k;
  out.loglik_trace.push_back(ppca_loglik(s, trace_s, st, n));

  const MatrixXd ik = MatrixXd::Identity(k, k);
  for (std::size_t it = 0; it < spec.max_iters; ++it) {
    const MatrixXd mm = st.w.transpose() * st.w + st.sigma2 * ik;
    const Eigen::LLT<MatrixXd> llt(mm);
    const MatrixXd sw = s * st.w;
    const MatrixXd inner = st.sigma2 * ik + llt.solve(st.w.transpose() * sw);
    const MatrixXd w_new = inner.transpose().partialPivLu().solve(sw.transpose()).transpose();
    double sigma2_new = (trace_s - (sw * llt.solve(w_new.transpose())).trace()) / static_cast<double>(m);
    if (!(sigma2_new > floor)) sigma2_new = floor;
    st = {w_new, sigma2_new};

    const double ll = ppca_loglik(s, trace_s, st, n);
    const double prev = out.loglik_trace.back();
    out.loglik_trace.push_back(ll);
    out.diagnostics.iterations = it + 1;
    if (std::abs(ll - prev) < spec.rel_tol * std::abs(prev)) {
      out.diagnostics.converged = true;
      break;
    }
  }
  if (!out.diagnostics.converged) out.diagnostics.warnings.push_back("ppca: max_iters reached before convergence");

  map.loadings = st.w;
  map.sigma2 = st.sigma2;
  out.mapping = map;
  out.zhat = evaluate(out.mapping, causes);
  return out;
}

}  // namespace deconlab::factor
