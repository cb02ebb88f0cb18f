#pragma once

// Symbolic queries on causal graphs.

#include "deconlab/scm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace deconlab::graph {

using scm::CausalGraph;

/// d-separation of node sets x and y given z, by the linear-time reachable
/// ("Bayes-ball") traversal. Sets must be pairwise disjoint.
bool d_separated(const CausalGraph& g, const std::vector<std::string>& x,
                 const std::vector<std::string>& y, const std::vector<std::string>& z);
bool d_separated(const CausalGraph& g, const std::vector<std::size_t>& x,
                 const std::vector<std::size_t>& y, const std::vector<std::size_t>& z);

enum class NodeLabel {
  multi_cause_confounder,
  single_cause_confounder,
  mediator,
  collider,
  m_bias_collider,
  neutral,
};

std::string_view to_string(NodeLabel label);

struct NodeClassification {
  std::string node;
  NodeLabel label = NodeLabel::neutral;
  std::vector<std::string> causes;
  std::string outcome;
};

/// When several definitions apply the first in this order wins: mediator,
/// collider, multi-cause confounder, single-cause confounder, M-bias collider.
NodeClassification classify_node(const CausalGraph& g, const std::string& node,
                                 const std::vector<std::string>& causes, const std::string& outcome);

/// A path in the skeleton; forward[i] is true when the edge between nodes[i]
/// and nodes[i+1] points towards nodes[i+1].
struct Path {
  std::vector<std::string> nodes;
  std::vector<bool> forward;

  std::string to_string() const;
};

struct AdjustmentVerdict {
  bool valid = true;
  std::string reason;
  std::optional<std::string> witness_node;
  std::optional<Path> witness_path;
};

/// Generalized adjustment criterion: z contains no descendant of a non-cause
/// node on a proper causal path, and z blocks every proper non-causal path.
/// Witnesses are the lexicographically least offending node or path.
AdjustmentVerdict is_valid_adjustment(const CausalGraph& g, const std::vector<std::string>& z,
                                      const std::vector<std::string>& causes, const std::string& outcome);

struct ConditionVerdict {
  int condition = 0;
  std::string description;
  bool holds = true;
  std::string witness;
};

struct ChecklistReport {
  std::vector<ConditionVerdict> conditions;

  bool all_hold() const;
  const ConditionVerdict& condition(int number) const;
  std::string to_text() const;
};

/// Conditions checked:
///   1  no unmeasured (latent) single-cause confounder
///   3  no M structure: P1 -> K <- P2 with P1 reaching a cause and P2 reaching
///      the outcome by directed paths that avoid K and the causes, K not a
///      descendant of any cause
///   4  no directed path between two causes
///   5  no member of z is a descendant of a cause
ChecklistReport check_assumptions(const CausalGraph& g, const std::vector<std::string>& causes,
                                  const std::string& outcome, const std::vector<std::string>& z);

/// Everything `check-graph` prints: the adjustment verdict, a label for every
/// non-treatment, non-outcome node, and the assumption checklist.
struct GraphReport {
  AdjustmentVerdict adjustment;
  std::vector<NodeClassification> nodes;
  ChecklistReport checklist;

  std::string to_text() const;
};

GraphReport graph_report(const CausalGraph& g, const std::vector<std::string>& treatments,
                         const std::string& outcome, const std::vector<std::string>& z);

}  // namespace deconlab::graph
