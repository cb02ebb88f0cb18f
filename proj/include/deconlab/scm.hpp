#pragma once

// Structural causal models: a DAG with one generating mechanism per node,
// sampled jointly with the potential outcomes of a grid of interventions.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace deconlab::scm {

enum class Role { cause, outcome, latent, auxiliary };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct Node {
  std::string name;
  Role role = Role::auxiliary;
};

using Edge = std::pair<std::string, std::string>;  // (parent, child)

/// Immutable DAG. Node indices follow declaration order; the topological
/// order is Kahn's algorithm with ties broken by lexicographic node name.
class CausalGraph {
 public:
  CausalGraph(std::vector<Node> nodes, std::vector<Edge> edges,
              std::vector<std::string> cause_order);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  const std::string& name(std::size_t i) const { return nodes_[i].name; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& cause_order() const { return cause_order_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws ConfigError for unknown names.
  std::size_t index(std::string_view name) const;
  std::vector<std::size_t> indices(const std::vector<std::string>& names) const;

  /// Sorted by node index.
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
  bool has_edge(std::size_t from, std::size_t to) const;

  const std::vector<std::size_t>& topological_order() const { return topo_; }
  std::size_t outcome() const { return outcome_; }
  /// Cause indices in cause_order order.
  const std::vector<std::size_t>& causes() const { return cause_idx_; }

  /// Masks include the seed nodes themselves.
  std::vector<char> ancestors(const std::vector<std::size_t>& of) const;
  std::vector<char> descendants(const std::vector<std::size_t>& of) const;

  /// Copy with every edge into `targets` removed.
  CausalGraph without_incoming(const std::vector<std::size_t>& targets) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::string> cause_order_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> topo_;
  std::vector<std::size_t> cause_idx_;
  std::size_t outcome_ = 0;
};

// ---- mechanisms -----------------------------------------------------------

/// value = intercept + sum_p w_p * parent_p + noise_sd * N(0, 1)
struct LinearGaussian {
  std::map<std::string, double> weights;
  double intercept = 0.0;
  double noise_sd = 1.0;
};

/// value = 1 with probability logistic(intercept + sum_p w_p * parent_p), else 0
struct BernoulliLogistic {
  std::map<std::string, double> weights;
  double intercept = 0.0;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// value = values[1] with probability prob, values[0] otherwise
struct TwoPoint {
  std::array<double, 2> values{0.0, 1.0};
  double prob = 0.5;
};

/// value = category index in {0, ..., k-1}, k = probs.size()
struct CategoricalIndicator {
  std::vector<double> probs;
};

/// Finite conditional table. `given` lists the parent values (ordered as
/// Table::parents) that select the row; a unit whose parent values match no
/// row is a runtime error.
struct TableRow {
  std::vector<double> given;
  std::vector<double> values;
  std::vector<double> probs;
};

struct Table {
  std::vector<std::string> parents;
  std::vector<TableRow> rows;
};

using Mechanism =
    std::variant<LinearGaussian, BernoulliLogistic, Uniform, TwoPoint, CategoricalIndicator, Table>;

std::string_view form_name(const Mechanism& mechanism);
bool is_linear_gaussian(const Mechanism& mechanism);

/// Graph plus one mechanism per node plus the base seed of the random streams.
/// Unit noise for node i in replicate r is drawn from the stream seeded with
/// mix64(seed, r, i).
class Scm {
 public:
  Scm(CausalGraph graph, std::map<std::string, Mechanism> mechanisms, std::uint64_t seed);

  const CausalGraph& graph() const { return graph_; }
  const Mechanism& mechanism(std::size_t node) const { return mechanisms_[node]; }
  const Mechanism& mechanism(std::string_view node) const;
  std::uint64_t seed() const { return seed_; }

  Scm with_seed(std::uint64_t seed) const;
  std::map<std::string, Mechanism> mechanism_map() const;

 private:
  CausalGraph graph_;
  std::vector<Mechanism> mechanisms_;
  std::uint64_t seed_;
};

// ---- data -----------------------------------------------------------------

/// do(cause = value, ...). Keys must be causes of the model it is applied to.
struct Intervention {
  std::map<std::string, double> assignments;

  bool operator==(const Intervention&) const = default;
};

std::string to_string(const Intervention& iv);

struct PotentialOutcomeTable {
  std::vector<Intervention> grid;
  Eigen::MatrixXd values;  // n x grid.size(), Y(a) per unit
};

struct FullData {
  std::size_t n = 0;
  std::vector<std::string> names;  // one per column
  std::vector<Role> roles;
  std::vector<std::string> cause_order;
  Eigen::MatrixXd columns;  // n x names.size()
  PotentialOutcomeTable potential_outcomes;

  std::optional<std::size_t> find(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
  Eigen::MatrixXd columns_named(const std::vector<std::string>& names) const;
};

/// Observed projection: causes, outcome and auxiliary columns.
struct Dataset {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<std::string> cause_names;
  Eigen::MatrixXd causes;  // n x m
  std::string outcome_name;
  Eigen::VectorXd outcome;
  std::vector<std::string> extra_names;
  Eigen::MatrixXd extra;  // n x extra_names.size()

  std::size_t cause_index(std::string_view name) const;
  Eigen::VectorXd extra_column(std::string_view name) const;
};

// ---- operations -----------------------------------------------------------

FullData sample_full_data(const Scm& scm, std::size_t n, const std::vector<Intervention>& grid,
                          std::uint64_t replicate);

Dataset mask_observed(const FullData& full);

/// A Dataset viewed as full data with no latent columns and no potential
/// outcomes; mask_observed(embed_observed(d)) reproduces d.
FullData embed_observed(const Dataset& data);

Scm apply_do(const Scm& scm, const Intervention& iv);

/// Exact total effect E[Y(a)] - E[Y(a')] by summing edge-weight products over
/// directed paths in the mutilated graph. Throws UnsupportedAnalyticError if a
/// node on such a path is not linear-gaussian.
double true_ace_path_trace(const Scm& scm, const Intervention& a, const Intervention& a_prime);

struct AceResult {
  double value = 0.0;
  double se = 0.0;
};

/// Mean of Y(a) - Y(a') over n * replicates simulated units (shared noise).
AceResult true_ace_monte_carlo(const Scm& scm, const Intervention& a, const Intervention& a_prime,
                               std::size_t n, std::size_t replicates);

}  // namespace deconlab::scm
