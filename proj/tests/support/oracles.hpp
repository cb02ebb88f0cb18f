#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include "deconlab/rng.hpp"
#include "deconlab/scm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

// Adjacency built from the edge list only, so the oracle shares no traversal
// code with the library.
struct Skeleton {
  std::size_t n = 0;
  std::vector<std::vector<bool>> arrow;  // arrow[i][j]: edge i -> j

  explicit Skeleton(const deconlab::scm::CausalGraph& g) : n(g.size()), arrow(n, std::vector<bool>(n, false)) {
    for (const auto& [p, c] : g.edges()) arrow[*g.find(p)][*g.find(c)] = true;
  }

  std::vector<bool> descendants_of(std::size_t v) const {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{v};
    seen[v] = true;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t w = 0; w < n; ++w) {
        if (arrow[u][w] && !seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return seen;
  }
};

// d-separation by enumerating every simple path of the skeleton from x to y
// and testing each for activity given z.
inline bool d_separated_by_paths(const deconlab::scm::CausalGraph& g, const std::vector<std::size_t>& xs,
                                 const std::vector<std::size_t>& ys, const std::vector<std::size_t>& zs) {
  const Skeleton sk(g);
  std::vector<bool> in_z(sk.n, false), in_y(sk.n, false);
  for (auto z : zs) in_z[z] = true;
  for (auto y : ys) in_y[y] = true;
  std::vector<bool> z_or_desc_anc(sk.n, false);  // node has a descendant (or itself) in z
  for (std::size_t v = 0; v < sk.n; ++v) {
    const auto d = sk.descendants_of(v);
    for (std::size_t w = 0; w < sk.n; ++w) {
      if (d[w] && in_z[w]) z_or_desc_anc[v] = true;
    }
  }
  auto adjacent = [&](std::size_t a, std::size_t b) { return sk.arrow[a][b] || sk.arrow[b][a]; };

  std::vector<std::size_t> path;
  std::vector<bool> on_path(sk.n, false);
  bool active_found = false;

  auto path_active = [&]() {
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
      const std::size_t prev = path[i - 1], v = path[i], next = path[i + 1];
      const bool collider = sk.arrow[prev][v] && sk.arrow[next][v];
      if (collider) {
        if (!z_or_desc_anc[v]) return false;
      } else if (in_z[v]) {
        return false;
      }
    }
    return true;
  };

  auto dfs = [&](auto&& self, std::size_t v) -> void {
    if (active_found) return;
    if (in_y[v] && path.size() > 1) {
      if (path_active()) active_found = true;
      return;
    }
    for (std::size_t w = 0; w < sk.n; ++w) {
      if (!on_path[w] && adjacent(v, w)) {
        on_path[w] = true;
        path.push_back(w);
        self(self, w);
        path.pop_back();
        on_path[w] = false;
      }
    }
  };
  for (auto x : xs) {
    path = {x};
    std::fill(on_path.begin(), on_path.end(), false);
    on_path[x] = true;
    dfs(dfs, x);
    if (active_found) return false;
  }
  return true;
}

// Pairwise d-separation for every conditioning set at once. All simple paths
// between two nodes are enumerated once; a path is active given the bitmask z
// when none of its non-colliders is in z and every collider has itself or a
// descendant in z. Graphs are limited to 16 nodes.
class PairwiseSeparation {
 public:
  explicit PairwiseSeparation(const deconlab::scm::CausalGraph& g) : sk_(g), n_(g.size()) {
    desc_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) {
      const auto d = sk_.descendants_of(v);
      for (std::size_t w = 0; w < n_; ++w) {
        if (d[w]) desc_[v] |= 1u << w;
      }
    }
    paths_.resize(n_ * n_);
    for (std::size_t x = 0; x < n_; ++x) {
      for (std::size_t y = 0; y < n_; ++y) {
        if (x != y) enumerate(x, y);
      }
    }
  }

  // True when x and y are d-separated given the node set z (x, y not in z).
  bool separated(std::size_t x, std::size_t y, std::uint32_t z) const {
    for (const auto& p : paths_[x * n_ + y]) {
      if (p.non_colliders & z) continue;
      bool open = true;
      for (std::uint32_t c : p.collider_desc) {
        if (!(c & z)) {
          open = false;
          break;
        }
      }
      if (open) return false;
    }
    return true;
  }

 private:
  struct PathMasks {
    std::uint32_t non_colliders = 0;
    std::vector<std::uint32_t> collider_desc;
  };

  void enumerate(std::size_t x, std::size_t y) {
    std::vector<std::size_t> path{x};
    std::uint32_t used = 1u << x;
    auto dfs = [&](auto&& self, std::size_t v) -> void {
      if (v == y) {
        PathMasks m;
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
          const std::size_t a = path[i - 1], b = path[i], c = path[i + 1];
          if (sk_.arrow[a][b] && sk_.arrow[c][b]) m.collider_desc.push_back(desc_[b]);
          else m.non_colliders |= 1u << b;
        }
        paths_[x * n_ + y].push_back(std::move(m));
        return;
      }
      for (std::size_t w = 0; w < n_; ++w) {
        if (!(used & (1u << w)) && (sk_.arrow[v][w] || sk_.arrow[w][v])) {
          used |= 1u << w;
          path.push_back(w);
          self(self, w);
          path.pop_back();
          used &= ~(1u << w);
        }
      }
    };
    dfs(dfs, x);
  }

  Skeleton sk_;
  std::size_t n_;
  std::vector<std::uint32_t> desc_ = {};
  std::vector<std::vector<PathMasks>> paths_;
};

// Random DAG on nodes X0..X{n-1}: an edge i -> j (i < j in a random order)
// is present with probability p.
inline deconlab::scm::CausalGraph random_dag(deconlab::RandomStream& rng, std::size_t n, double p) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<deconlab::scm::Node> nodes;
  // Graphs need exactly one outcome node; roles play no part in d-separation.
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({"X" + std::to_string(i), i == 0 ? deconlab::scm::Role::outcome : deconlab::scm::Role::auxiliary});
  }
  std::vector<deconlab::scm::Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (rng.uniform() < p) edges.push_back({nodes[order[a]].name, nodes[order[b]].name});
    }
  }
  return deconlab::scm::CausalGraph(nodes, edges, {});
}

// Largest principal angle (degrees) between the column spaces of a and b.
inline double largest_principal_angle_deg(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                             Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                             Eigen::MatrixXd::Identity(b.rows(), b.cols());
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(qa.transpose() * qb).singularValues();
  const double smallest = std::clamp(s.minCoeff(), -1.0, 1.0);
  return std::acos(smallest) * 180.0 / 3.14159265358979323846;
}

// Accuracy of predicted labels against truth, maximized over relabelings of two clusters.
inline double two_label_accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) same += predicted[i] == truth[i];
  const double acc = static_cast<double>(same) / static_cast<double>(truth.size());
  return std::max(acc, 1.0 - acc);
}

// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
inline double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Ordinary least squares via the normal equations, solved with an LDLT; an
// independent route from the library's QR solver.
inline Eigen::VectorXd ols_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

}  // namespace oracle
