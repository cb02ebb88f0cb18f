#include "deconlab/estimators.hpp"
#include "deconlab/linear_model.hpp"
#include "deconlab/rng.hpp"
#include "deconlab/scenarios.hpp"

#include "support/models.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace deconlab;
using namespace deconlab::estimate;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Sample {
  scm::FullData full;
  scm::Dataset data;
};

Sample draw(const scm::Scm& scm, std::size_t n, std::uint64_t seed) {
  Sample s{scm::sample_full_data(scm.with_seed(seed), n, {}, 0), {}};
  s.data = scm::mask_observed(s.full);
  return s;
}

EstimatorOptions with_bootstrap(std::size_t b, std::uint64_t seed = 5) {
  EstimatorOptions o;
  o.bootstrap = b;
  o.seed = seed;
  return o;
}

factor::SubstituteConfounder substitute_from(const MatrixXd& zhat, factor::Family family = factor::Family::ppca) {
  factor::SubstituteConfounder sub;
  sub.family = family;
  sub.k = static_cast<std::size_t>(zhat.cols());
  sub.zhat = zhat;
  return sub;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("adjusting for the true confounder recovers the effect") {
  const auto s = draw(models::confounded_triangle(), 20000, 1);
  const Estimand e = unit_contrast({"A"});
  const auto est = estimate_adjusted(s.data, full_covariates(s.full, {"U"}), e, with_bootstrap(200));
  CHECK(std::abs(est.point - 1.0) <= 3.0 * est.se);
  CHECK(est.estimator == EstimatorKind::oracle_adjusted);
  CHECK(est.provenance == "U");
}

TEST_CASE("naive slope in the confounded triangle is 1 + gamma / 2") {
  const auto s = draw(models::confounded_triangle(), 20000, 2);
  const auto est = estimate_naive(s.data, unit_contrast({"A"}), with_bootstrap(200));
  CHECK(std::abs(est.point - 2.0) <= 3.0 * est.se);
  const auto clean = draw(models::confounded_triangle(1.0, 0.0), 20000, 3);
  const auto c = estimate_naive(clean.data, unit_contrast({"A"}), with_bootstrap(200));
  CHECK(std::abs(c.point - 1.0) <= 3.0 * c.se);
}

TEST_CASE("empty covariate set reduces to the naive estimator") {
  const auto s = draw(models::confounded_triangle(), 500, 4);
  const Estimand e = unit_contrast({"A"});
  const auto a = estimate_adjusted(s.data, Covariates{{}, MatrixXd(500, 0)}, e, with_bootstrap(30));
  const auto b = estimate_naive(s.data, e, with_bootstrap(30));
  CHECK(a.point == b.point);
  CHECK(a.se == b.se);
  CHECK(a.estimator == EstimatorKind::naive);
}

TEST_CASE("point estimate equals the least-squares coefficient of the intervened cause") {
  const auto sc = scenarios::build_scenario("g", {std::size_t{6}, false, {}});
  const auto s = draw(sc.scm, 3000, 9);
  const auto est = estimate_adjusted(s.data, full_covariates(s.full, {"U"}), sc.estimand, with_bootstrap(0));
  // Design [1, A_1..A_6, U], solved through the normal equations.
  MatrixXd x(3000, 8);
  x.col(0).setOnes();
  x.middleCols(1, 6) = s.data.causes;
  x.col(7) = s.full.column("U");
  const VectorXd beta = oracle::ols_normal_equations(x, s.data.outcome);
  CHECK(est.point == doctest::Approx(beta[1]).epsilon(1e-9));
  CHECK(std::isnan(est.se));
}

TEST_CASE("bootstrap is seeded and close to the analytic standard error") {
  const auto s = draw(models::confounded_triangle(), 5000, 12);
  const Estimand e = unit_contrast({"A"});
  const auto a = estimate_adjusted(s.data, full_covariates(s.full, {"U"}), e, with_bootstrap(400, 1));
  const auto b = estimate_adjusted(s.data, full_covariates(s.full, {"U"}), e, with_bootstrap(400, 1));
  const auto c = estimate_adjusted(s.data, full_covariates(s.full, {"U"}), e, with_bootstrap(400, 2));
  CHECK(a.se == b.se);
  CHECK(a.se != c.se);
  // Homoskedastic OLS: se(beta_A) = sigma / sqrt(n * Var(A | U)) = 1 / sqrt(5000).
  CHECK(a.se == doctest::Approx(1.0 / std::sqrt(5000.0)).epsilon(0.15));
}

TEST_CASE("substitute equal to a cause column is rejected as collinear") {
  const auto sc = scenarios::build_scenario("g", {std::size_t{5}, false, {}});
  const auto s = draw(sc.scm, 400, 3);
  const auto sub = substitute_from(s.data.causes.col(2));
  try {
    estimate_substitute(s.data, sub, sc.estimand, with_bootstrap(0));
    FAIL("expected a collinearity error");
  } catch (const CollinearityError& err) {
    CHECK(err.report().rank_deficient);
    CHECK(err.report().condition_number > 1e10);
    CHECK(err.report().columns.back() == "zhat1");
  }
}

TEST_CASE("exact linear substitute of the causes is rejected") {
  const auto sc = scenarios::build_scenario("f", {std::size_t{5}, false, {}});
  const auto s = draw(sc.scm, 400, 8);
  const VectorXd combo = s.data.causes * VectorXd::LinSpaced(5, 0.2, 1.0);
  const auto rep = collinearity_report(s.data, Covariates{{"zhat1"}, combo}, sc.estimand);
  CHECK(rep.rank_deficient);
  CHECK(rep.variance_inflation.size() == rep.columns.size() - 1);
}

TEST_CASE("mixture substitutes lose their redundant last column") {
  MatrixXd r(4, 3);
  r << 0.2, 0.3, 0.5, 0.1, 0.1, 0.8, 0.6, 0.2, 0.2, 0.3, 0.3, 0.4;
  const auto cov = substitute_covariates(substitute_from(r, factor::Family::mixture));
  CHECK(cov.names == std::vector<std::string>{"zhat1", "zhat2"});
  CHECK(cov.values == r.leftCols(2));
  MatrixXd with_const(4, 2);
  with_const << 1, 0.5, 1, 0.2, 1, 0.9, 1, 0.1;
  CHECK(substitute_covariates(substitute_from(with_const)).names == std::vector<std::string>{"zhat2"});
}

TEST_CASE("scenario a: adjusting for R biases the effect of A_1") {
  const auto sc = scenarios::build_scenario("a");
  const auto s = draw(sc.scm, 100000, 21);
  auto est = estimate_adjusted(s.data, full_covariates(s.full, {"R"}), sc.estimand, with_bootstrap(100));
  set_truth(est, sc.truth);
  CHECK(std::abs(est.bias) > 5.0 * est.se);
}

TEST_CASE("scenario d: naive estimate of A_m is unbiased") {
  const auto sc = scenarios::build_scenario("d");
  const auto s = draw(sc.scm, 20000, 22);
  const auto est = estimate_naive(s.data, sc.estimand, with_bootstrap(200));
  CHECK(std::abs(est.point - sc.truth) <= 3.0 * est.se);
}

TEST_CASE("overlap passes for causes independent of the strata") {
  RandomStream r(6);
  const std::size_t n = 4000;
  scm::Dataset d;
  d.n = n;
  d.m = 2;
  d.cause_names = {"A_1", "A_2"};
  d.causes.resize(n, 2);
  d.outcome.resize(n);
  MatrixXd resp(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    d.causes(i, 0) = static_cast<double>(r.below(2));
    d.causes(i, 1) = static_cast<double>(r.below(2));
    d.outcome(i) = r.normal();
    const double p = r.uniform();
    resp(i, 0) = p;
    resp(i, 1) = 1 - p;
  }
  const auto rep = overlap_diagnostic(d, substitute_from(resp, factor::Family::mixture), {"A_1", "A_2"});
  CHECK(rep.pass);
  CHECK(rep.counts.minCoeff() > 0);

  // A stratum that is a deterministic function of A_1.
  for (std::size_t i = 0; i < n; ++i) {
    resp(i, 0) = d.causes(i, 0) > 0.5 ? 0.9 : 0.1;
    resp(i, 1) = 1 - resp(i, 0);
  }
  const auto bad = overlap_diagnostic(d, substitute_from(resp, factor::Family::mixture), {"A_1"});
  CHECK_FALSE(bad.pass);
  CHECK(bad.witness.find("no units with") != std::string::npos);
}

TEST_CASE("overlap in scenario f with one intervened cause") {
  const auto sc = scenarios::build_scenario("f");
  const auto s = draw(sc.scm, 5000, 30);
  factor::FactorModelSpec spec;
  spec.family = factor::Family::mixture;
  spec.k = 2;
  const auto sub = factor::fit(s.data.causes, spec);
  CHECK(overlap_diagnostic(s.data, sub, {"A_1"}).pass);
}

TEST_CASE("ci_test detects the confounder and degenerates on linear functions of the conditioning set") {
  const auto s = draw(models::confounded_triangle(), 10000, 40);
  const MatrixXd a = s.data.causes;
  const auto dep = ci_test(s.data.outcome, s.full.columns_named({"U"}), a, 0.05);
  CHECK(dep.verdict == "dependent");
  CHECK(dep.p_value < 0.001);

  const MatrixXd lin = 3.0 * a.array() - 1.0;
  const auto deg = ci_test(s.data.outcome, lin, a, 0.05);
  CHECK(deg.verdict == "degenerate: collinear");
  CHECK(std::isnan(deg.p_value));
}

TEST_CASE("ci_test is calibrated for pure-noise columns") {
  RandomStream r(50);
  const int reps = 500;
  const std::size_t n = 200;
  const double alpha = 0.05;
  int rejections = 0;
  for (int rep = 0; rep < reps; ++rep) {
    VectorXd y(n);
    MatrixXd z(n, 1), c(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
      c(i, 0) = r.normal();
      c(i, 1) = r.normal();
      y(i) = c(i, 0) - c(i, 1) + r.normal();
      z(i, 0) = r.normal();
    }
    rejections += ci_test(y, z, c, alpha).p_value < alpha;
  }
  const double rate = rejections / static_cast<double>(reps);
  CHECK(std::abs(rate - alpha) < 3.0 * std::sqrt(alpha * (1 - alpha) / reps));
}

TEST_CASE("fisher z and normal cdf against reference values") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  // r = 0.1, n = 403, q = 0: z = atanh(0.1) * sqrt(400).
  const auto [z, p] = stats::fisher_z_test(0.1, 403, 0);
  CHECK(z == doctest::Approx(std::atanh(0.1) * 20.0));
  CHECK(p == doctest::Approx(2.0 * (1.0 - stats::normal_cdf(z))));
}

}  // TEST_SUITE
