#include "deconlab/errors.hpp"
#include "deconlab/factor_models.hpp"
#include "internal.hpp"

#include <cmath>
#include <numbers>

namespace deconlab::factor {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

std::string_view to_string(Family family) {
  switch (family) {
    case Family::ppca: return "ppca";
    case Family::poisson_mf: return "poisson-mf";
    case Family::mixture: return "mixture";
  }
  return "?";
}

Family family_from_string(std::string_view text) {
  if (text == "ppca") return Family::ppca;
  if (text == "poisson-mf") return Family::poisson_mf;
  if (text == "mixture") return Family::mixture;
  throw ConfigError("unknown factor-model family '" + std::string(text) + "'");
}

namespace {

void check_width(Index expected, const MatrixXd& causes) {
  if (causes.cols() != expected) {
    throw ConfigError("mapping expects " + std::to_string(expected) + " cause columns, got " +
                      std::to_string(causes.cols()));
  }
}

MatrixXd standardized(const PpcaMapping& pm, const MatrixXd& causes) {
  check_width(pm.mean.size(), causes);
  MatrixXd y = causes.rowwise() - pm.mean.transpose();
  return y.array().rowwise() / pm.scale.transpose().array();
}

MatrixXd ppca_m(const PpcaMapping& pm) {
  const Index k = pm.loadings.cols();
  return pm.loadings.transpose() * pm.loadings + pm.sigma2 * MatrixXd::Identity(k, k);
}

json matrix_json(const MatrixXd& x) {
  json rows = json::array();
  for (Index i = 0; i < x.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

MatrixXd matrix_from(const json& rows, const char* what) {
  if (!rows.is_array()) throw ConfigError(std::string(what) + " must be an array of rows");
  const Index r = static_cast<Index>(rows.size());
  const Index c = r > 0 ? static_cast<Index>(rows[0].size()) : 0;
  MatrixXd x(r, c);
  for (Index i = 0; i < r; ++i) {
    if (!rows[i].is_array() || static_cast<Index>(rows[i].size()) != c) {
      throw ConfigError(std::string(what) + " has ragged rows");
    }
    for (Index j = 0; j < c; ++j) x(i, j) = rows[i][j].get<double>();
  }
  return x;
}

VectorXd vector_from(const json& v, const char* what) {
  if (!v.is_array()) throw ConfigError(std::string(what) + " must be an array");
  VectorXd out(static_cast<Index>(v.size()));
  for (Index i = 0; i < out.size(); ++i) out[i] = v[i].get<double>();
  return out;
}

}  // namespace

MatrixXd evaluate(const Mapping& mapping, const MatrixXd& causes) {
  if (const auto* pm = std::get_if<PpcaMapping>(&mapping)) {
    const MatrixXd y = standardized(*pm, causes);
    return ppca_m(*pm).llt().solve(pm->loadings.transpose() * y.transpose()).transpose();
  }
  if (const auto* mm = std::get_if<MixtureMapping>(&mapping)) {
    check_width(mm->means.cols(), causes);
    return mixture_responsibilities(*mm, causes);
  }
  const auto& pm = std::get<PoissonMapping>(mapping);
  check_width(pm.loadings.rows(), causes);
  return poisson_fold_in(pm, causes);
}

VectorXd row_loglik(const Mapping& mapping, const MatrixXd& causes) {
  if (const auto* pm = std::get_if<PpcaMapping>(&mapping)) {
    const MatrixXd y = standardized(*pm, causes);
    const Index m = pm->loadings.rows();
    const Index k = pm->loadings.cols();
    const Eigen::LLT<MatrixXd> llt(ppca_m(*pm));
    const double logdet_m = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double logdet_c = static_cast<double>(m - k) * std::log(pm->sigma2) + logdet_m;
    const double log_jacobian = pm->scale.array().log().sum();
    // y^T C^{-1} y = (|y|^2 - y^T W M^{-1} W^T y) / sigma2
    const MatrixXd proj = y * pm->loadings;  // n x k
    const MatrixXd solved = llt.solve(proj.transpose()).transpose();
    const VectorXd quad =
        (y.rowwise().squaredNorm() - proj.cwiseProduct(solved).rowwise().sum()) / pm->sigma2;
    const double c0 = -0.5 * (static_cast<double>(m) * std::log(2.0 * std::numbers::pi) + logdet_c) - log_jacobian;
    return (c0 - 0.5 * quad.array()).matrix();
  }
  if (const auto* mm = std::get_if<MixtureMapping>(&mapping)) {
    check_width(mm->means.cols(), causes);
    return mixture_row_loglik(*mm, causes);
  }
  const auto& pm = std::get<PoissonMapping>(mapping);
  check_width(pm.loadings.rows(), causes);
  const MatrixXd theta = poisson_fold_in(pm, causes);
  return poisson_row_loglik(causes, theta * pm.loadings.transpose());
}

SubstituteConfounder fit(const MatrixXd& causes, const FactorModelSpec& spec) {
  switch (spec.family) {
    case Family::ppca: return fit_ppca(causes, spec);
    case Family::mixture: return fit_mixture(causes, spec);
    case Family::poisson_mf: return fit_poisson_mf(causes, spec);
  }
  throw ConfigError("unknown factor-model family");
}

bool is_monotone(const std::vector<double>& trace, double slack) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i] < trace[i - 1] - slack * std::abs(trace[i - 1])) return false;
  }
  return true;
}

json to_json(const SubstituteConfounder& sub) {
  json params;
  if (const auto* pm = std::get_if<PpcaMapping>(&sub.mapping)) {
    params = {{"mean", vector_json(pm->mean)},
              {"scale", vector_json(pm->scale)},
              {"loadings", matrix_json(pm->loadings)},
              {"sigma2", pm->sigma2}};
  } else if (const auto* mm = std::get_if<MixtureMapping>(&sub.mapping)) {
    params = {{"weights", vector_json(mm->weights)},
              {"means", matrix_json(mm->means)},
              {"variances", vector_json(mm->variances)}};
  } else {
    const auto& pm = std::get<PoissonMapping>(sub.mapping);
    params = {{"loadings", matrix_json(pm.loadings)},
              {"fold_in_iters", pm.fold_in_iters},
              {"fold_in_tol", pm.fold_in_tol}};
  }
  return {{"family", std::string(to_string(sub.family))},
          {"k", sub.k},
          {"parameters", params},
          {"loglik_trace", sub.loglik_trace},
          {"diagnostics",
           {{"iterations", sub.diagnostics.iterations},
            {"converged", sub.diagnostics.converged},
            {"reseeded", sub.diagnostics.reseeded},
            {"warnings", sub.diagnostics.warnings}}}};
}

Mapping mapping_from_json(const json& doc) {
  try {
    const Family family = family_from_string(doc.at("family").get<std::string>());
    const json& p = doc.at("parameters");
    switch (family) {
      case Family::ppca: {
        PpcaMapping pm;
        pm.mean = vector_from(p.at("mean"), "mean");
        pm.scale = vector_from(p.at("scale"), "scale");
        pm.loadings = matrix_from(p.at("loadings"), "loadings");
        pm.sigma2 = p.at("sigma2").get<double>();
        if (pm.scale.size() != pm.mean.size() || pm.loadings.rows() != pm.mean.size()) {
          throw ConfigError("ppca parameters have inconsistent sizes");
        }
        return pm;
      }
      case Family::mixture: {
        MixtureMapping mm;
        mm.weights = vector_from(p.at("weights"), "weights");
        mm.means = matrix_from(p.at("means"), "means");
        mm.variances = vector_from(p.at("variances"), "variances");
        if (mm.means.rows() != mm.weights.size() || mm.means.cols() != mm.variances.size()) {
          throw ConfigError("mixture parameters have inconsistent sizes");
        }
        return mm;
      }
      case Family::poisson_mf: {
        PoissonMapping pm;
        pm.loadings = matrix_from(p.at("loadings"), "loadings");
        pm.fold_in_iters = p.at("fold_in_iters").get<std::size_t>();
        pm.fold_in_tol = p.at("fold_in_tol").get<double>();
        return pm;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("fitted-model document: ") + e.what());
  }
  throw ConfigError("fitted-model document: unknown family");
}

}  // namespace deconlab::factor
