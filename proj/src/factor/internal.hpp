#pragma once

#include "deconlab/factor_models.hpp"

namespace deconlab::factor {

Eigen::MatrixXd mixture_responsibilities(const MixtureMapping& mm, const Eigen::MatrixXd& x);
Eigen::VectorXd mixture_row_loglik(const MixtureMapping& mm, const Eigen::MatrixXd& x);

/// Theta rows for x with B fixed, by multiplicative KL updates from theta = sum(x) / sum(B).
Eigen::MatrixXd poisson_fold_in(const PoissonMapping& pm, const Eigen::MatrixXd& x);
/// Sum over entries of x log(lambda) - lambda - lgamma(x + 1), per row.
Eigen::VectorXd poisson_row_loglik(const Eigen::MatrixXd& x, const Eigen::MatrixXd& rate);

}  // namespace deconlab::factor
