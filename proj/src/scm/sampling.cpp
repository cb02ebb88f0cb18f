#include "deconlab/errors.hpp"
#include "deconlab/rng.hpp"
#include "deconlab/scm.hpp"

#include <cmath>

namespace deconlab::scm {
namespace {

using Eigen::Index;

// Per-node parent weights aligned with graph().parents(node).
std::vector<double> aligned_weights(const std::map<std::string, double>& weights,
                                    const CausalGraph& g, std::size_t node) {
  std::vector<double> out;
  for (std::size_t p : g.parents(node)) out.push_back(weights.at(g.name(p)));
  return out;
}

double inverse_cdf(const std::vector<double>& values, const std::vector<double>& probs, double u) {
  double cum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return values[k];
  }
  return values.back();
}

/// Exogenous randomness of one node: N(0,1) draws for linear-gaussian nodes,
/// U(0,1) draws for every other form.
Eigen::VectorXd draw_noise(const Mechanism& mech, std::size_t n, std::uint64_t seed) {
  RandomStream rs(seed);
  Eigen::VectorXd e(static_cast<Index>(n));
  if (is_linear_gaussian(mech)) {
    for (Index r = 0; r < e.size(); ++r) e[r] = rs.normal();
  } else {
    for (Index r = 0; r < e.size(); ++r) e[r] = rs.uniform();
  }
  return e;
}

void evaluate_node(const Scm& scm, std::size_t node, const Eigen::VectorXd& noise,
                   Eigen::MatrixXd& cols) {
  const auto& g = scm.graph();
  const auto& parents = g.parents(node);
  const Index n = cols.rows();
  auto out = cols.col(static_cast<Index>(node));

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearGaussian>) {
          const auto w = aligned_weights(m.weights, g, node);
          for (Index r = 0; r < n; ++r) {
            double v = m.intercept;
            for (std::size_t k = 0; k < parents.size(); ++k) v += w[k] * cols(r, static_cast<Index>(parents[k]));
            out[r] = v + m.noise_sd * noise[r];
          }
        } else if constexpr (std::is_same_v<T, BernoulliLogistic>) {
          const auto w = aligned_weights(m.weights, g, node);
          for (Index r = 0; r < n; ++r) {
            double eta = m.intercept;
            for (std::size_t k = 0; k < parents.size(); ++k) eta += w[k] * cols(r, static_cast<Index>(parents[k]));
            const double p = 1.0 / (1.0 + std::exp(-eta));
            out[r] = noise[r] < p ? 1.0 : 0.0;
          }
        } else if constexpr (std::is_same_v<T, Uniform>) {
          for (Index r = 0; r < n; ++r) out[r] = m.lo + (m.hi - m.lo) * noise[r];
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          for (Index r = 0; r < n; ++r) out[r] = noise[r] < m.prob ? m.values[1] : m.values[0];
        } else if constexpr (std::is_same_v<T, CategoricalIndicator>) {
          std::vector<double> idx(m.probs.size());
          for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<double>(k);
          for (Index r = 0; r < n; ++r) out[r] = inverse_cdf(idx, m.probs, noise[r]);
        } else if constexpr (std::is_same_v<T, Table>) {
          std::vector<Index> pcol;
          for (const auto& p : m.parents) pcol.push_back(static_cast<Index>(g.index(p)));
          for (Index r = 0; r < n; ++r) {
            const TableRow* hit = nullptr;
            for (const auto& row : m.rows) {
              bool match = true;
              for (std::size_t k = 0; k < pcol.size() && match; ++k) match = cols(r, pcol[k]) == row.given[k];
              if (match) {
                hit = &row;
                break;
              }
            }
            if (!hit) throw Error("table of '" + g.name(node) + "' has no row for the parent values of a unit");
            out[r] = inverse_cdf(hit->values, hit->probs, noise[r]);
          }
        }
      },
      scm.mechanism(node));
}

void check_intervention(const CausalGraph& g, const Intervention& iv) {
  for (const auto& [name, value] : iv.assignments) {
    const auto i = g.find(name);
    if (!i) throw ConfigError("intervention names unknown node '" + name + "'");
    if (g.node(*i).role != Role::cause) throw ConfigError("intervention target '" + name + "' is not a cause");
    if (!std::isfinite(value)) throw ConfigError("intervention value for '" + name + "' is not finite");
  }
}

}  // namespace

FullData sample_full_data(const Scm& scm, std::size_t n, const std::vector<Intervention>& grid,
                          std::uint64_t replicate) {
  if (n == 0) throw ConfigError("sample size must be >= 1");
  const auto& g = scm.graph();
  for (const auto& iv : grid) check_intervention(g, iv);

  const std::size_t nodes = g.size();
  std::vector<Eigen::VectorXd> noise(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    noise[i] = draw_noise(scm.mechanism(i), n, mix64(scm.seed(), replicate, i));
  }

  FullData fd;
  fd.n = n;
  fd.cause_order = g.cause_order();
  for (const auto& node : g.nodes()) {
    fd.names.push_back(node.name);
    fd.roles.push_back(node.role);
  }
  fd.columns.resize(static_cast<Index>(n), static_cast<Index>(nodes));
  for (std::size_t v : g.topological_order()) evaluate_node(scm, v, noise[v], fd.columns);

  // Counterfactual worlds reuse the unit noise; only descendants of the
  // intervened nodes are recomputed.
  fd.potential_outcomes.grid = grid;
  fd.potential_outcomes.values.resize(static_cast<Index>(n), static_cast<Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Eigen::MatrixXd world = fd.columns;
    std::vector<char> changed(nodes, 0);
    for (std::size_t v : g.topological_order()) {
      auto hit = grid[k].assignments.find(g.name(v));
      if (hit != grid[k].assignments.end()) {
        world.col(static_cast<Index>(v)).setConstant(hit->second);
        changed[v] = 1;
        continue;
      }
      bool dirty = false;
      for (std::size_t p : g.parents(v)) dirty = dirty || changed[p];
      if (dirty) {
        evaluate_node(scm, v, noise[v], world);
        changed[v] = 1;
      }
    }
    fd.potential_outcomes.values.col(static_cast<Index>(k)) = world.col(static_cast<Index>(g.outcome()));
  }
  return fd;
}

Dataset mask_observed(const FullData& full) {
  Dataset d;
  d.n = full.n;
  d.cause_names = full.cause_order;
  d.m = d.cause_names.size();
  d.causes = full.columns_named(d.cause_names);
  for (std::size_t j = 0; j < full.names.size(); ++j) {
    if (full.roles[j] == Role::outcome) {
      d.outcome_name = full.names[j];
      d.outcome = full.columns.col(static_cast<Index>(j));
    } else if (full.roles[j] == Role::auxiliary) {
      d.extra_names.push_back(full.names[j]);
    }
  }
  d.extra = full.columns_named(d.extra_names);
  return d;
}

FullData embed_observed(const Dataset& data) {
  FullData fd;
  fd.n = data.n;
  fd.cause_order = data.cause_names;
  const Index n = static_cast<Index>(data.n);
  fd.columns.resize(n, static_cast<Index>(data.m + 1 + data.extra_names.size()));
  Index c = 0;
  for (std::size_t j = 0; j < data.m; ++j, ++c) {
    fd.names.push_back(data.cause_names[j]);
    fd.roles.push_back(Role::cause);
    fd.columns.col(c) = data.causes.col(static_cast<Index>(j));
  }
  fd.names.push_back(data.outcome_name);
  fd.roles.push_back(Role::outcome);
  fd.columns.col(c++) = data.outcome;
  for (std::size_t j = 0; j < data.extra_names.size(); ++j, ++c) {
    fd.names.push_back(data.extra_names[j]);
    fd.roles.push_back(Role::auxiliary);
    fd.columns.col(c) = data.extra.col(static_cast<Index>(j));
  }
  fd.potential_outcomes.values.resize(n, 0);
  return fd;
}

Scm apply_do(const Scm& scm, const Intervention& iv) {
  const auto& g = scm.graph();
  check_intervention(g, iv);
  if (iv.assignments.empty()) return scm;
  std::vector<std::size_t> targets;
  auto mechanisms = scm.mechanism_map();
  for (const auto& [name, value] : iv.assignments) {
    targets.push_back(g.index(name));
    mechanisms[name] = LinearGaussian{{}, value, 0.0};
  }
  return Scm(g.without_incoming(targets), std::move(mechanisms), scm.seed());
}

double true_ace_path_trace(const Scm& scm, const Intervention& a, const Intervention& a_prime) {
  const auto& g = scm.graph();
  check_intervention(g, a);
  check_intervention(g, a_prime);
  if (a.assignments.size() != a_prime.assignments.size()) {
    throw ConfigError("contrast interventions must assign the same causes");
  }
  std::vector<std::size_t> targets;
  std::vector<double> effect(g.size(), 0.0);
  std::vector<char> fixed(g.size(), 0);
  for (const auto& [name, value] : a.assignments) {
    auto other = a_prime.assignments.find(name);
    if (other == a_prime.assignments.end()) throw ConfigError("contrast interventions must assign the same causes");
    const std::size_t i = g.index(name);
    targets.push_back(i);
    fixed[i] = 1;
    effect[i] = value - other->second;
  }
  if (targets.empty()) return 0.0;

  const CausalGraph cut = g.without_incoming(targets);
  const auto down = cut.descendants(targets);
  const auto up = cut.ancestors({cut.outcome()});
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (down[v] && up[v] && !fixed[v] && !is_linear_gaussian(scm.mechanism(v))) {
      throw UnsupportedAnalyticError("node '" + g.name(v) + "' on a causal path is " +
                                     std::string(form_name(scm.mechanism(v))) +
                                     "; path tracing needs linear-gaussian mechanisms");
    }
  }
  for (std::size_t v : cut.topological_order()) {
    if (fixed[v] || !down[v] || !up[v]) continue;
    const auto& m = std::get<LinearGaussian>(scm.mechanism(v));
    double sum = 0.0;
    for (std::size_t p : cut.parents(v)) sum += m.weights.at(g.name(p)) * effect[p];
    effect[v] = sum;
  }
  return down[g.outcome()] ? effect[g.outcome()] : 0.0;
}

AceResult true_ace_monte_carlo(const Scm& scm, const Intervention& a, const Intervention& a_prime,
                               std::size_t n, std::size_t replicates) {
  if (replicates == 0) throw ConfigError("monte-carlo ACE needs at least one replicate");
  double sum = 0.0;
  double sumsq = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    const FullData fd = sample_full_data(scm, n, {a, a_prime}, r);
    const Eigen::VectorXd diff = fd.potential_outcomes.values.col(0) - fd.potential_outcomes.values.col(1);
    sum += diff.sum();
    sumsq += diff.squaredNorm();
  }
  const double total = static_cast<double>(n * replicates);
  const double mean = sum / total;
  const double var = total > 1 ? std::max(0.0, (sumsq - total * mean * mean) / (total - 1.0)) : 0.0;
  return {mean, std::sqrt(var / total)};
}

}  // namespace deconlab::scm
