#pragma once

// Least-squares and correlation helpers shared by the factor-model
// diagnostics and the effect estimators.

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace deconlab::stats {

/// Standard normal CDF.
double normal_cdf(double x);

/// Two-sided Fisher-z test of a (partial) correlation r estimated from n
/// units after conditioning on q columns. Returns (z statistic, p-value).
std::pair<double, double> fisher_z_test(double r, std::size_t n, std::size_t q);

/// [1 | x]
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x);

/// Indices of the columns of x kept when each column is dropped if it is
/// (numerically) a linear combination of an intercept and the columns kept
/// before it. Constant columns are always dropped.
std::vector<std::size_t> independent_columns(const Eigen::MatrixXd& x, double tol = 1e-10);

/// Residuals of every column of y after least-squares regression on
/// [1 | conditioning].
Eigen::MatrixXd residualize(const Eigen::MatrixXd& y, const Eigen::MatrixXd& conditioning);

/// Pearson correlation; 0 when either vector has zero spread.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Ratio of extreme singular values of x after scaling every column to unit
/// Euclidean norm (zero columns stay zero, giving an infinite ratio).
/// Singular values come from a QR factorization of x, not from x^T x.
double condition_number(const Eigen::MatrixXd& x);

/// Sample mean and standard error of the mean (NaN error for fewer than 2 values).
std::pair<double, double> mean_and_se(const std::vector<double>& values);

}  // namespace deconlab::stats
