#include "deconlab/graph_analysis.hpp"

#include "deconlab/errors.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace deconlab::graph {
namespace {

using Mask = std::vector<char>;

Mask mask_of(std::size_t n, const std::vector<std::size_t>& idx) {
  Mask m(n, 0);
  for (std::size_t i : idx) m[i] = 1;
  return m;
}

void require_disjoint(std::size_t n, const std::vector<std::vector<std::size_t>>& sets) {
  Mask seen(n, 0);
  for (const auto& s : sets) {
    Mask here(n, 0);
    for (std::size_t i : s) {
      if (i >= n) throw ConfigError("node index out of range");
      if (seen[i] && !here[i]) throw ConfigError("node sets must be disjoint");
      seen[i] = here[i] = 1;
    }
  }
}

template <class Adj>
Mask ancestors_of(const Adj& adj, const Mask& seed) {
  Mask out(seed);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < seed.size(); ++i) {
    if (seed[i]) stack.push_back(i);
  }
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t p : adj.parents(v)) {
      if (!out[p]) {
        out[p] = 1;
        stack.push_back(p);
      }
    }
  }
  return out;
}

// Reachable traversal: a ball moving up (arrived from a child) or down
// (arrived from a parent). Non-colliders pass unless in z; colliders pass
// only when they have a descendant in z.
template <class Adj>
bool bayes_ball(const Adj& adj, std::size_t n, const Mask& x, const Mask& y, const Mask& z) {
  const Mask anz = ancestors_of(adj, z);
  Mask visited(2 * n, 0);
  std::vector<std::pair<std::size_t, bool>> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i]) stack.emplace_back(i, true);
  }
  while (!stack.empty()) {
    const auto [v, up] = stack.back();
    stack.pop_back();
    char& seen = visited[2 * v + (up ? 0 : 1)];
    if (seen) continue;
    seen = 1;
    if (!z[v] && y[v]) return false;
    if (up) {
      if (z[v]) continue;
      for (std::size_t p : adj.parents(v)) stack.emplace_back(p, true);
      for (std::size_t c : adj.children(v)) stack.emplace_back(c, false);
    } else {
      if (!z[v]) {
        for (std::size_t c : adj.children(v)) stack.emplace_back(c, false);
      }
      if (anz[v]) {
        for (std::size_t p : adj.parents(v)) stack.emplace_back(p, true);
      }
    }
  }
  return true;
}

// Adjacency with neighbour lists sorted by node name, so depth-first searches
// visit paths in lexicographic order of their node-name sequences. Edges in
// `removed` are left out.
class NamedAdjacency {
 public:
  explicit NamedAdjacency(const CausalGraph& g,
                          const std::vector<std::pair<std::size_t, std::size_t>>& removed = {}) {
    const std::size_t n = g.size();
    par_.assign(n, {});
    chi_.assign(n, {});
    nbr_.assign(n, {});
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c : g.children(v)) {
        if (std::find(removed.begin(), removed.end(), std::make_pair(v, c)) != removed.end()) continue;
        chi_[v].push_back(c);
        par_[c].push_back(v);
      }
    }
    auto by_name = [&g](std::size_t a, std::size_t b) { return g.name(a) < g.name(b); };
    for (std::size_t v = 0; v < n; ++v) {
      std::sort(par_[v].begin(), par_[v].end(), by_name);
      std::sort(chi_[v].begin(), chi_[v].end(), by_name);
      nbr_[v] = par_[v];
      nbr_[v].insert(nbr_[v].end(), chi_[v].begin(), chi_[v].end());
      std::sort(nbr_[v].begin(), nbr_[v].end(), by_name);
    }
  }

  std::size_t size() const { return par_.size(); }
  const std::vector<std::size_t>& parents(std::size_t v) const { return par_[v]; }
  const std::vector<std::size_t>& children(std::size_t v) const { return chi_[v]; }
  const std::vector<std::size_t>& neighbours(std::size_t v) const { return nbr_[v]; }
  bool edge(std::size_t from, std::size_t to) const {
    return std::find(chi_[from].begin(), chi_[from].end(), to) != chi_[from].end();
  }
  Mask ancestors(const Mask& seed) const { return ancestors_of(*this, seed); }
  bool d_separated(const Mask& x, const Mask& y, const Mask& z) const {
    return bayes_ball(*this, size(), x, y, z);
  }

 private:
  std::vector<std::vector<std::size_t>> par_, chi_, nbr_;
};

// Lexicographically least path from any start to any target, interior nodes
// avoiding `forbidden_interior`, such that every interior triple passes
// `open`. Returns node indices.
std::optional<std::vector<std::size_t>> least_open_path(
    const CausalGraph& g, const NamedAdjacency& adj, const std::vector<std::size_t>& starts,
    const Mask& targets, const Mask& forbidden_interior,
    const std::function<bool(std::size_t prev, std::size_t mid, std::size_t next)>& open) {
  std::vector<std::size_t> sorted = starts;
  std::sort(sorted.begin(), sorted.end(), [&g](auto a, auto b) { return g.name(a) < g.name(b); });
  std::vector<std::size_t> path;
  Mask on_path(g.size(), 0);
  std::function<bool(std::size_t)> dfs = [&](std::size_t v) -> bool {
    for (std::size_t w : adj.neighbours(v)) {
      if (on_path[w]) continue;
      // v is interior once the path has a predecessor for it.
      if (path.size() >= 2 && !open(path[path.size() - 2], v, w)) continue;
      if (targets[w]) {
        path.push_back(w);
        return true;
      }
      if (forbidden_interior[w]) continue;
      path.push_back(w);
      on_path[w] = 1;
      if (dfs(w)) return true;
      on_path[w] = 0;
      path.pop_back();
    }
    return false;
  };
  for (std::size_t s : sorted) {
    path.assign(1, s);
    std::fill(on_path.begin(), on_path.end(), 0);
    on_path[s] = 1;
    if (dfs(s)) return path;
  }
  return std::nullopt;
}

Path to_path(const CausalGraph& g, const NamedAdjacency& adj, const std::vector<std::size_t>& idx) {
  Path p;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    p.nodes.push_back(g.name(idx[i]));
    if (i + 1 < idx.size()) p.forward.push_back(adj.edge(idx[i], idx[i + 1]));
  }
  return p;
}

// Nodes with a directed path to `target` whose intermediate nodes avoid `avoid`.
Mask reaches_avoiding(const NamedAdjacency& adj, std::size_t target, const Mask& avoid) {
  Mask out(adj.size(), 0);
  std::vector<std::size_t> stack{target};
  out[target] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t p : adj.parents(v)) {
      if (out[p]) continue;
      out[p] = 1;
      if (!avoid[p]) stack.push_back(p);
    }
  }
  return out;
}

// Nodes reachable from `sources` along directed paths whose non-source nodes avoid `avoid`.
Mask reached_from_avoiding(const NamedAdjacency& adj, const std::vector<std::size_t>& sources, const Mask& avoid) {
  Mask out(adj.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t s : sources) {
    for (std::size_t c : adj.children(s)) stack.push_back(c);
  }
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (out[v] || avoid[v]) continue;
    out[v] = 1;
    for (std::size_t c : adj.children(v)) stack.push_back(c);
  }
  return out;
}

std::vector<std::size_t> resolve(const CausalGraph& g, const std::vector<std::string>& names) {
  return g.indices(names);
}

std::string least_name(const CausalGraph& g, const Mask& m) {
  std::string best;
  bool any = false;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] && (!any || g.name(i) < best)) {
      best = g.name(i);
      any = true;
    }
  }
  return best;
}

}  // namespace

bool d_separated(const CausalGraph& g, const std::vector<std::size_t>& x,
                 const std::vector<std::size_t>& y, const std::vector<std::size_t>& z) {
  require_disjoint(g.size(), {x, y, z});
  return bayes_ball(g, g.size(), mask_of(g.size(), x), mask_of(g.size(), y), mask_of(g.size(), z));
}

bool d_separated(const CausalGraph& g, const std::vector<std::string>& x,
                 const std::vector<std::string>& y, const std::vector<std::string>& z) {
  return d_separated(g, resolve(g, x), resolve(g, y), resolve(g, z));
}

std::string_view to_string(NodeLabel label) {
  switch (label) {
    case NodeLabel::multi_cause_confounder: return "multi-cause-confounder";
    case NodeLabel::single_cause_confounder: return "single-cause-confounder";
    case NodeLabel::mediator: return "mediator";
    case NodeLabel::collider: return "collider";
    case NodeLabel::m_bias_collider: return "m-bias-collider";
    case NodeLabel::neutral: return "neutral";
  }
  return "neutral";
}

std::string Path::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) os << (forward[i - 1] ? " -> " : " <- ");
    os << nodes[i];
  }
  return os.str();
}

NodeClassification classify_node(const CausalGraph& g, const std::string& node,
                                 const std::vector<std::string>& causes, const std::string& outcome) {
  const std::size_t v = g.index(node);
  const auto cause_idx = resolve(g, causes);
  const std::size_t y = g.index(outcome);
  const Mask is_cause = mask_of(g.size(), cause_idx);
  if (is_cause[v] || v == y) throw ConfigError("cannot classify '" + node + "': it is a cause or the outcome");

  NodeClassification out{node, NodeLabel::neutral, causes, outcome};
  const NamedAdjacency adj(g);
  const Mask desc_causes = g.descendants(cause_idx);
  const Mask desc_outcome = g.descendants({y});
  const Mask anc_outcome = g.ancestors({y});

  if (desc_causes[v] && anc_outcome[v]) {
    out.label = NodeLabel::mediator;
    return out;
  }

  std::size_t parents_in_scope = 0;
  for (std::size_t p : g.parents(v)) {
    if (desc_causes[p] || desc_outcome[p]) ++parents_in_scope;
  }
  if (parents_in_scope >= 2) {
    out.label = NodeLabel::collider;
    return out;
  }

  const Mask to_outcome = reaches_avoiding(adj, y, is_cause);
  if (to_outcome[v]) {
    std::size_t reached = 0;
    for (std::size_t c : cause_idx) {
      if (reaches_avoiding(adj, c, is_cause)[v]) ++reached;
    }
    if (reached >= 2) {
      out.label = NodeLabel::multi_cause_confounder;
      return out;
    }
    if (reached == 1) {
      out.label = NodeLabel::single_cause_confounder;
      return out;
    }
  }

  if (!desc_causes[v] && !desc_outcome[v]) {
    Mask avoid = is_cause;
    avoid[v] = 1;
    const Mask to_y = reaches_avoiding(adj, y, avoid);
    Mask to_cause(g.size(), 0);
    for (std::size_t c : cause_idx) {
      const Mask r = reaches_avoiding(adj, c, avoid);
      for (std::size_t i = 0; i < g.size(); ++i) to_cause[i] = to_cause[i] || r[i];
    }
    const auto& ps = g.parents(v);
    for (std::size_t p1 : ps) {
      if (is_cause[p1] || !to_cause[p1]) continue;
      for (std::size_t p2 : ps) {
        if (p2 != p1 && !is_cause[p2] && p2 != y && to_y[p2]) {
          out.label = NodeLabel::m_bias_collider;
          return out;
        }
      }
    }
  }
  return out;
}

AdjustmentVerdict is_valid_adjustment(const CausalGraph& g, const std::vector<std::string>& z,
                                      const std::vector<std::string>& causes, const std::string& outcome) {
  const auto zi = resolve(g, z);
  const auto xi = resolve(g, causes);
  const std::size_t y = g.index(outcome);
  require_disjoint(g.size(), {zi, xi, {y}});
  if (xi.empty()) throw ConfigError("adjustment check needs at least one cause");

  const Mask is_x = mask_of(g.size(), xi);
  const Mask is_z = mask_of(g.size(), zi);
  const NamedAdjacency adj(g);

  // Non-cause nodes on proper causal paths X -> ... -> Y.
  const Mask from_x = reached_from_avoiding(adj, xi, is_x);
  const Mask to_y = reaches_avoiding(adj, y, is_x);
  Mask on_causal(g.size(), 0);
  std::vector<std::size_t> on_causal_idx;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!is_x[v] && from_x[v] && to_y[v]) {
      on_causal[v] = 1;
      on_causal_idx.push_back(v);
    }
  }

  AdjustmentVerdict verdict;
  const Mask forbidden = g.descendants(on_causal_idx);
  Mask bad(g.size(), 0);
  bool any_bad = false;
  for (std::size_t v : zi) {
    if (forbidden[v]) {
      bad[v] = 1;
      any_bad = true;
    }
  }
  if (any_bad) {
    verdict.valid = false;
    verdict.witness_node = least_name(g, bad);
    verdict.reason = "'" + *verdict.witness_node + "' descends from a node on a proper causal path";
  }

  // Proper back-door graph: drop the first edge of every proper causal path.
  std::vector<std::pair<std::size_t, std::size_t>> removed;
  for (std::size_t x : xi) {
    for (std::size_t c : g.children(x)) {
      if (on_causal[c]) removed.emplace_back(x, c);
    }
  }
  const NamedAdjacency pbd(g, removed);
  if (!pbd.d_separated(is_x, mask_of(g.size(), {y}), is_z)) {
    const Mask anz = pbd.ancestors(is_z);
    auto open = [&](std::size_t prev, std::size_t mid, std::size_t next) {
      const bool collider = pbd.edge(prev, mid) && pbd.edge(next, mid);
      return collider ? static_cast<bool>(anz[mid]) : !is_z[mid];
    };
    auto path = least_open_path(g, pbd, xi, mask_of(g.size(), {y}), is_x, open);
    if (verdict.valid) {
      verdict.valid = false;
      verdict.reason = "an open non-causal path remains";
    } else {
      verdict.reason += "; an open non-causal path also remains";
    }
    if (path) verdict.witness_path = to_path(g, pbd, *path);
  }
  if (verdict.valid) verdict.reason = "valid adjustment set";
  return verdict;
}

bool ChecklistReport::all_hold() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.holds; });
}

const ConditionVerdict& ChecklistReport::condition(int number) const {
  for (const auto& c : conditions) {
    if (c.condition == number) return c;
  }
  throw ConfigError("checklist has no condition " + std::to_string(number));
}

std::string ChecklistReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : conditions) {
    os << "  [" << (c.holds ? "ok  " : "FAIL") << "] (" << c.condition << ") " << c.description;
    if (!c.holds) os << "  witness: " << c.witness;
    os << "\n";
  }
  return os.str();
}

ChecklistReport check_assumptions(const CausalGraph& g, const std::vector<std::string>& causes,
                                  const std::string& outcome, const std::vector<std::string>& z) {
  const auto xi = resolve(g, causes);
  const auto zi = resolve(g, z);
  const std::size_t y = g.index(outcome);
  const Mask is_x = mask_of(g.size(), xi);
  const NamedAdjacency adj(g);
  ChecklistReport report;

  {
    ConditionVerdict c{1, "no unmeasured single-cause confounders", true, {}};
    Mask hits(g.size(), 0);
    bool any = false;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (is_x[v] || v == y || g.node(v).role != scm::Role::latent) continue;
      if (classify_node(g, g.name(v), causes, outcome).label == NodeLabel::single_cause_confounder) {
        hits[v] = 1;
        any = true;
      }
    }
    if (any) {
      c.holds = false;
      c.witness = least_name(g, hits);
    }
    report.conditions.push_back(c);
  }

  {
    ConditionVerdict c{3, "no M structures between causes and outcome", true, {}};
    const Mask desc_x = g.descendants(xi);
    std::optional<std::array<std::string, 3>> best;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (is_x[k] || k == y || desc_x[k]) continue;
      Mask avoid = is_x;
      avoid[k] = 1;
      const Mask to_y = reaches_avoiding(adj, y, avoid);
      Mask to_cause(g.size(), 0);
      for (std::size_t x : xi) {
        const Mask r = reaches_avoiding(adj, x, avoid);
        for (std::size_t i = 0; i < g.size(); ++i) to_cause[i] = to_cause[i] || r[i];
      }
      for (std::size_t p1 : g.parents(k)) {
        if (is_x[p1] || !to_cause[p1]) continue;
        for (std::size_t p2 : g.parents(k)) {
          if (p2 == p1 || is_x[p2] || p2 == y || !to_y[p2]) continue;
          std::array<std::string, 3> t{g.name(p1), g.name(k), g.name(p2)};
          if (!best || t < *best) best = t;
        }
      }
    }
    if (best) {
      c.holds = false;
      c.witness = (*best)[0] + " -> " + (*best)[1] + " <- " + (*best)[2];
    }
    report.conditions.push_back(c);
  }

  {
    ConditionVerdict c{4, "causes are not causally dependent", true, {}};
    Mask none(g.size(), 0);
    std::optional<std::vector<std::size_t>> best;
    std::vector<std::size_t> sorted = xi;
    std::sort(sorted.begin(), sorted.end(), [&g](auto a, auto b) { return g.name(a) < g.name(b); });
    for (std::size_t s : sorted) {
      Mask others = is_x;
      others[s] = 0;
      // Directed search only: every step must follow a child edge.
      std::vector<std::size_t> path{s};
      Mask on(g.size(), 0);
      on[s] = 1;
      std::function<bool(std::size_t)> dfs = [&](std::size_t v) -> bool {
        for (std::size_t w : adj.children(v)) {
          if (on[w]) continue;
          path.push_back(w);
          if (others[w]) return true;
          on[w] = 1;
          if (dfs(w)) return true;
          on[w] = 0;
          path.pop_back();
        }
        return false;
      };
      if (dfs(s)) {
        best = path;
        break;
      }
    }
    if (best) {
      c.holds = false;
      c.witness = to_path(g, adj, *best).to_string();
    }
    report.conditions.push_back(c);
  }

  {
    ConditionVerdict c{5, "no post-treatment variables in the adjustment set", true, {}};
    Mask strict_desc(g.size(), 0);
    for (std::size_t x : xi) {
      for (std::size_t ch : g.children(x)) {
        const Mask d = g.descendants({ch});
        for (std::size_t i = 0; i < g.size(); ++i) strict_desc[i] = strict_desc[i] || d[i];
      }
    }
    Mask hits(g.size(), 0);
    bool any = false;
    for (std::size_t v : zi) {
      if (strict_desc[v]) {
        hits[v] = 1;
        any = true;
      }
    }
    if (any) {
      c.holds = false;
      c.witness = least_name(g, hits);
    }
    report.conditions.push_back(c);
  }
  return report;
}

GraphReport graph_report(const CausalGraph& g, const std::vector<std::string>& treatments,
                         const std::string& outcome, const std::vector<std::string>& z) {
  GraphReport r;
  r.adjustment = is_valid_adjustment(g, z, treatments, outcome);
  std::vector<std::string> names;
  for (const auto& node : g.nodes()) {
    if (node.name == outcome || std::find(treatments.begin(), treatments.end(), node.name) != treatments.end()) continue;
    names.push_back(node.name);
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) r.nodes.push_back(classify_node(g, name, treatments, outcome));
  r.checklist = check_assumptions(g, treatments, outcome, z);
  return r;
}

std::string GraphReport::to_text() const {
  std::ostringstream os;
  os << "adjustment set: " << (adjustment.valid ? "VALID" : "INVALID") << "\n";
  if (!adjustment.valid) {
    os << "  reason: " << adjustment.reason << "\n";
    if (adjustment.witness_node) os << "  witness node: " << *adjustment.witness_node << "\n";
    if (adjustment.witness_path) os << "  witness path: " << adjustment.witness_path->to_string() << "\n";
  }
  os << "node labels:\n";
  for (const auto& n : nodes) os << "  " << n.node << ": " << to_string(n.label) << "\n";
  os << "assumption checklist:\n" << checklist.to_text();
  return os.str();
}

}  // namespace deconlab::graph
