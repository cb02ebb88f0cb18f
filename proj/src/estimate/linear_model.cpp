#include "deconlab/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace deconlab::stats {

using Eigen::Index;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::pair<double, double> fisher_z_test(double r, std::size_t n, std::size_t q) {
  const double dof = static_cast<double>(n) - static_cast<double>(q) - 3.0;
  if (dof <= 0.0) return {0.0, 1.0};
  const double rc = std::clamp(r, -1.0, 1.0);
  const double z = std::atanh(rc) * std::sqrt(dof);
  if (std::isinf(z)) return {z, 0.0};
  return {z, std::erfc(std::abs(z) / std::numbers::sqrt2)};
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

std::vector<std::size_t> independent_columns(const Eigen::MatrixXd& x, double tol) {
  std::vector<std::size_t> kept;
  const Index n = x.rows();
  // Gram-Schmidt against an orthonormal basis starting with the normalized intercept.
  std::vector<Eigen::VectorXd> basis;
  basis.push_back(Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
  for (Index j = 0; j < x.cols(); ++j) {
    Eigen::VectorXd v = x.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= b.dot(v) * b;
    }
    const double norm1 = v.norm();
    if (norm1 <= tol * norm0) continue;
    basis.push_back(v / norm1);
    kept.push_back(static_cast<std::size_t>(j));
  }
  return kept;
}

Eigen::MatrixXd residualize(const Eigen::MatrixXd& y, const Eigen::MatrixXd& conditioning) {
  const Eigen::MatrixXd design = with_intercept(conditioning);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd coef = qr.solve(y);
  return y - design * coef;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double na = ca.norm();
  const double nb = cb.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return ca.dot(cb) / (na * nb);
}

double condition_number(const Eigen::MatrixXd& x) {
  if (x.cols() == 0) return 1.0;
  Eigen::MatrixXd scaled = x;
  for (Index j = 0; j < x.cols(); ++j) {
    const double nrm = x.col(j).norm();
    if (nrm > 0.0) scaled.col(j) /= nrm;
  }
  Eigen::MatrixXd r;
  if (scaled.rows() > scaled.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled);
    r = qr.matrixQR().topRows(scaled.cols()).triangularView<Eigen::Upper>();
  } else {
    r = scaled;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s[s.size() - 1];
  if (scaled.rows() < scaled.cols() || smin == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (values.empty()) return {nan, nan};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, nan};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(values.size()))};
}

}  // namespace deconlab::stats
