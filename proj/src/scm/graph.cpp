#include "deconlab/errors.hpp"
#include "deconlab/scm.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace deconlab::scm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::cause: return "cause";
    case Role::outcome: return "outcome";
    case Role::latent: return "latent";
    case Role::auxiliary: return "auxiliary";
  }
  return "auxiliary";
}

Role role_from_string(std::string_view text) {
  if (text == "cause") return Role::cause;
  if (text == "outcome") return Role::outcome;
  if (text == "latent") return Role::latent;
  if (text == "auxiliary") return Role::auxiliary;
  throw ConfigError("unknown node role '" + std::string(text) + "'");
}

CausalGraph::CausalGraph(std::vector<Node> nodes, std::vector<Edge> edges,
                         std::vector<std::string> cause_order)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), cause_order_(std::move(cause_order)) {
  const std::size_t n = nodes_.size();
  {
    std::set<std::string> seen;
    for (const auto& node : nodes_) {
      if (node.name.empty()) throw ConfigError("node with empty name");
      if (!seen.insert(node.name).second) throw ConfigError("duplicate node '" + node.name + "'");
    }
  }
  parents_.assign(n, {});
  children_.assign(n, {});
  for (const auto& [from, to] : edges_) {
    const auto p = find(from);
    const auto c = find(to);
    if (!p) throw ConfigError("edge parent '" + from + "' is not a node");
    if (!c) throw ConfigError("edge child '" + to + "' is not a node");
    if (*p == *c) throw ConfigError("self loop on '" + from + "'");
    if (std::find(parents_[*c].begin(), parents_[*c].end(), *p) != parents_[*c].end()) {
      throw ConfigError("duplicate edge " + from + " -> " + to);
    }
    parents_[*c].push_back(*p);
    children_[*p].push_back(*c);
  }
  for (auto& v : parents_) std::sort(v.begin(), v.end());
  for (auto& v : children_) std::sort(v.begin(), v.end());

  // Kahn with a name-ordered ready set.
  std::vector<std::size_t> indegree(n);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = parents_[i].size();
  auto by_name = [this](std::size_t a, std::size_t b) { return nodes_[a].name > nodes_[b].name; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_name)> ready(by_name);
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    topo_.push_back(i);
    for (std::size_t c : children_[i]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (topo_.size() != n) throw ConfigError("graph has a directed cycle");

  std::size_t outcomes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].role == Role::outcome) {
      outcome_ = i;
      ++outcomes;
    }
  }
  if (outcomes != 1) {
    throw ConfigError("graph must have exactly one outcome node, found " + std::to_string(outcomes));
  }

  std::set<std::string> listed;
  for (const auto& c : cause_order_) {
    if (!listed.insert(c).second) throw ConfigError("cause '" + c + "' listed twice in cause_order");
    const auto i = find(c);
    if (!i) throw ConfigError("cause_order names unknown node '" + c + "'");
    if (nodes_[*i].role != Role::cause) {
      throw ConfigError("cause_order entry '" + c + "' does not have role cause");
    }
    cause_idx_.push_back(*i);
  }
  for (const auto& node : nodes_) {
    if (node.role == Role::cause && !listed.count(node.name)) {
      throw ConfigError("cause '" + node.name + "' missing from cause_order");
    }
  }
}

std::optional<std::size_t> CausalGraph::find(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t CausalGraph::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw ConfigError("unknown node '" + std::string(name) + "'");
}

std::vector<std::size_t> CausalGraph::indices(const std::vector<std::string>& names) const {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(index(n));
  return out;
}

bool CausalGraph::has_edge(std::size_t from, std::size_t to) const {
  return std::binary_search(children_[from].begin(), children_[from].end(), to);
}

std::vector<char> CausalGraph::ancestors(const std::vector<std::size_t>& of) const {
  std::vector<char> mark(size(), 0);
  std::vector<std::size_t> stack(of.begin(), of.end());
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (mark[v]) continue;
    mark[v] = 1;
    for (std::size_t p : parents_[v]) stack.push_back(p);
  }
  return mark;
}

std::vector<char> CausalGraph::descendants(const std::vector<std::size_t>& of) const {
  std::vector<char> mark(size(), 0);
  std::vector<std::size_t> stack(of.begin(), of.end());
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (mark[v]) continue;
    mark[v] = 1;
    for (std::size_t c : children_[v]) stack.push_back(c);
  }
  return mark;
}

CausalGraph CausalGraph::without_incoming(const std::vector<std::size_t>& targets) const {
  std::vector<char> cut(size(), 0);
  for (std::size_t t : targets) cut.at(t) = 1;
  std::vector<Edge> kept;
  for (const auto& e : edges_) {
    if (!cut[index(e.second)]) kept.push_back(e);
  }
  return CausalGraph(nodes_, std::move(kept), cause_order_);
}

}  // namespace deconlab::scm
