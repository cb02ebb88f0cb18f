#include "deconlab/errors.hpp"
#include "deconlab/scm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace deconlab::scm {
namespace {

constexpr double kSimplexTolerance = 1e-12;

void check_simplex(const std::vector<double>& probs, const std::string& where) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(where + ": probability outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) throw ConfigError(where + ": probabilities do not sum to 1");
}

void check_weight_keys(const std::map<std::string, double>& weights, const CausalGraph& g,
                       std::size_t node) {
  const auto& name = g.name(node);
  std::set<std::string> expected;
  for (std::size_t p : g.parents(node)) expected.insert(g.name(p));
  std::set<std::string> got;
  for (const auto& [k, w] : weights) {
    if (!std::isfinite(w)) throw ConfigError("mechanism of '" + name + "': non-finite weight for '" + k + "'");
    got.insert(k);
  }
  if (got != expected) {
    throw ConfigError("mechanism of '" + name + "': weight keys must be exactly the graph parents");
  }
}

void validate(const Mechanism& mech, const CausalGraph& g, std::size_t node) {
  const std::string where = "mechanism of '" + g.name(node) + "'";
  const bool exogenous = g.parents(node).empty();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearGaussian>) {
          check_weight_keys(m.weights, g, node);
          if (!(m.noise_sd >= 0.0) || !std::isfinite(m.noise_sd)) throw ConfigError(where + ": noise_sd must be >= 0");
          if (!std::isfinite(m.intercept)) throw ConfigError(where + ": non-finite intercept");
        } else if constexpr (std::is_same_v<T, BernoulliLogistic>) {
          check_weight_keys(m.weights, g, node);
          if (!std::isfinite(m.intercept)) throw ConfigError(where + ": non-finite intercept");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (!exogenous) throw ConfigError(where + ": uniform requires zero parents");
          if (!(m.hi > m.lo) || !std::isfinite(m.lo) || !std::isfinite(m.hi)) throw ConfigError(where + ": uniform requires lo < hi");
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          if (!exogenous) throw ConfigError(where + ": two-point requires zero parents");
          if (!(m.prob >= 0.0 && m.prob <= 1.0)) throw ConfigError(where + ": prob outside [0, 1]");
        } else if constexpr (std::is_same_v<T, CategoricalIndicator>) {
          if (!exogenous) throw ConfigError(where + ": categorical-indicator requires zero parents");
          if (m.probs.size() < 2) throw ConfigError(where + ": categorical-indicator needs k >= 2");
          check_simplex(m.probs, where);
        } else if constexpr (std::is_same_v<T, Table>) {
          std::set<std::string> expected;
          for (std::size_t p : g.parents(node)) expected.insert(g.name(p));
          std::set<std::string> got(m.parents.begin(), m.parents.end());
          if (got != expected || got.size() != m.parents.size()) {
            throw ConfigError(where + ": table parents must be exactly the graph parents");
          }
          if (m.rows.empty()) throw ConfigError(where + ": table has no rows");
          for (const auto& row : m.rows) {
            if (row.given.size() != m.parents.size()) throw ConfigError(where + ": table row arity mismatch");
            if (row.values.empty() || row.values.size() != row.probs.size()) {
              throw ConfigError(where + ": table row values/probs mismatch");
            }
            check_simplex(row.probs, where);
          }
        }
      },
      mech);
}

}  // namespace

std::string_view form_name(const Mechanism& mechanism) {
  return std::visit(
      [](const auto& m) -> std::string_view {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearGaussian>) return "linear-gaussian";
        if constexpr (std::is_same_v<T, BernoulliLogistic>) return "bernoulli-logistic";
        if constexpr (std::is_same_v<T, Uniform>) return "uniform";
        if constexpr (std::is_same_v<T, TwoPoint>) return "two-point";
        if constexpr (std::is_same_v<T, CategoricalIndicator>) return "categorical-indicator";
        if constexpr (std::is_same_v<T, Table>) return "table";
      },
      mechanism);
}

bool is_linear_gaussian(const Mechanism& mechanism) {
  return std::holds_alternative<LinearGaussian>(mechanism);
}

Scm::Scm(CausalGraph graph, std::map<std::string, Mechanism> mechanisms, std::uint64_t seed)
    : graph_(std::move(graph)), seed_(seed) {
  for (const auto& [name, mech] : mechanisms) {
    if (!graph_.find(name)) throw ConfigError("mechanism given for unknown node '" + name + "'");
  }
  mechanisms_.reserve(graph_.size());
  for (std::size_t i = 0; i < graph_.size(); ++i) {
    auto it = mechanisms.find(graph_.name(i));
    if (it == mechanisms.end()) throw ConfigError("node '" + graph_.name(i) + "' has no mechanism");
    validate(it->second, graph_, i);
    mechanisms_.push_back(std::move(it->second));
  }
}

const Mechanism& Scm::mechanism(std::string_view node) const {
  return mechanisms_[graph_.index(node)];
}

Scm Scm::with_seed(std::uint64_t seed) const {
  Scm copy = *this;
  copy.seed_ = seed;
  return copy;
}

std::map<std::string, Mechanism> Scm::mechanism_map() const {
  std::map<std::string, Mechanism> out;
  for (std::size_t i = 0; i < graph_.size(); ++i) out.emplace(graph_.name(i), mechanisms_[i]);
  return out;
}

std::string to_string(const Intervention& iv) {
  std::ostringstream os;
  os << "do(";
  bool first = true;
  for (const auto& [k, v] : iv.assignments) {
    if (!first) os << ", ";
    os << k << "=" << v;
    first = false;
  }
  os << ")";
  return os.str();
}

std::optional<std::size_t> FullData::find(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

Eigen::VectorXd FullData::column(std::string_view name) const {
  const auto i = find(name);
  if (!i) throw ConfigError("full data has no column '" + std::string(name) + "'");
  return columns.col(static_cast<Eigen::Index>(*i));
}

Eigen::MatrixXd FullData::columns_named(const std::vector<std::string>& wanted) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t j = 0; j < wanted.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = column(wanted[j]);
  return out;
}

std::size_t Dataset::cause_index(std::string_view name) const {
  for (std::size_t j = 0; j < cause_names.size(); ++j) {
    if (cause_names[j] == name) return j;
  }
  throw ConfigError("dataset has no cause '" + std::string(name) + "'");
}

Eigen::VectorXd Dataset::extra_column(std::string_view name) const {
  for (std::size_t j = 0; j < extra_names.size(); ++j) {
    if (extra_names[j] == name) return extra.col(static_cast<Eigen::Index>(j));
  }
  throw ConfigError("dataset has no observed column '" + std::string(name) + "'");
}

}  // namespace deconlab::scm
