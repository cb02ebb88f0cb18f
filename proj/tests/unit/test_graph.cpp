#include "deconlab/graph_analysis.hpp"
#include "deconlab/rng.hpp"
#include "deconlab/scenarios.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace deconlab;
using namespace deconlab::graph;
using deconlab::scm::CausalGraph;
using deconlab::scm::Role;

namespace {

CausalGraph graph_of(const char* id) { return scenarios::build_scenario(id).scm.graph(); }

std::vector<std::string> all_causes(const CausalGraph& g) { return g.cause_order(); }

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("blocked chain") {
  const CausalGraph g({{"A", Role::cause}, {"B", Role::auxiliary}, {"C", Role::outcome}}, {{"A", "B"}, {"B", "C"}},
                      {"A"});
  CHECK(d_separated(g, std::vector<std::string>{"A"}, {"C"}, {"B"}));
  CHECK_FALSE(d_separated(g, std::vector<std::string>{"A"}, {"C"}, {}));
}

TEST_CASE("collider opens when conditioned or a descendant is conditioned") {
  const CausalGraph g({{"A", Role::cause}, {"B", Role::auxiliary}, {"C", Role::auxiliary}, {"D", Role::outcome}},
                      {{"A", "C"}, {"B", "C"}, {"C", "D"}}, {"A"});
  CHECK(d_separated(g, std::vector<std::string>{"A"}, {"B"}, {}));
  CHECK_FALSE(d_separated(g, std::vector<std::string>{"A"}, {"B"}, {"C"}));
  CHECK_FALSE(d_separated(g, std::vector<std::string>{"A"}, {"B"}, {"D"}));
}

TEST_CASE("m-bias graph") {
  const auto g = graph_of("d");
  CHECK(d_separated(g, std::vector<std::string>{"A_5"}, {"Y"}, {}));
  CHECK_FALSE(d_separated(g, std::vector<std::string>{"A_5"}, {"Y"}, {"M"}));
  const std::vector<std::size_t> x{g.index("A_5")}, y{g.index("Y")}, none{}, m{g.index("M")};
  CHECK(oracle::d_separated_by_paths(g, x, y, none));
  CHECK_FALSE(oracle::d_separated_by_paths(g, x, y, m));
}

TEST_CASE("single-cause collider graph") {
  const auto g = graph_of("c");
  CHECK(d_separated(g, std::vector<std::string>{"A_5"}, {"Y"}, {"U"}));
  CHECK_FALSE(d_separated(g, std::vector<std::string>{"A_5"}, {"Y"}, {"U", "C"}));
}

TEST_CASE("reachability agrees with path enumeration on random graphs") {
  RandomStream rng(2024);
  std::size_t checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    const CausalGraph g = oracle::random_dag(rng, n, 0.35);
    // Random disjoint (x, y, z): each node lands in x, y, z or nowhere.
    std::vector<std::size_t> x, y, z;
    for (std::size_t v = 0; v < n; ++v) {
      switch (rng.below(4)) {
        case 0: x.push_back(v); break;
        case 1: y.push_back(v); break;
        case 2: z.push_back(v); break;
        default: break;
      }
    }
    if (x.empty() || y.empty()) continue;
    ++checked;
    CHECK(d_separated(g, x, y, z) == oracle::d_separated_by_paths(g, x, y, z));
  }
  CHECK(checked > 50);
}

TEST_CASE("d_separated rejects overlapping sets") {
  const auto g = graph_of("d");
  CHECK_THROWS(d_separated(g, std::vector<std::string>{"A_1"}, {"A_1"}, {}));
}

TEST_CASE("node classification") {
  const auto b = graph_of("b");
  CHECK(classify_node(b, "D", all_causes(b), "Y").label == NodeLabel::mediator);
  CHECK(classify_node(b, "U", all_causes(b), "Y").label == NodeLabel::multi_cause_confounder);
  const auto d = graph_of("d");
  CHECK(classify_node(d, "M", all_causes(d), "Y").label == NodeLabel::m_bias_collider);
  const auto c = graph_of("c");
  CHECK(classify_node(c, "C", all_causes(c), "Y").label == NodeLabel::collider);
  const auto e = graph_of("e");
  CHECK(classify_node(e, "V", all_causes(e), "Y").label == NodeLabel::single_cause_confounder);
  CHECK(to_string(NodeLabel::m_bias_collider) == "m-bias-collider");
}

TEST_CASE("U is an ancestor of every cause and of Y in scenario b") {
  const auto b = graph_of("b");
  const auto anc_y = b.ancestors({b.index("Y")});
  CHECK(anc_y[b.index("U")]);
  for (auto c : b.causes()) CHECK(b.ancestors({c})[b.index("U")]);
}

TEST_CASE("adjustment criterion") {
  {
    const auto a = graph_of("a");
    const auto v = is_valid_adjustment(a, {"R"}, {"A_1", "A_2", "A_3"}, "Y");
    CHECK_FALSE(v.valid);
    CHECK_FALSE(v.reason.empty());
  }
  {
    const auto b = graph_of("b");
    CHECK(is_valid_adjustment(b, {"U"}, all_causes(b), "Y").valid);
    const auto bad = is_valid_adjustment(b, {"U", "D"}, all_causes(b), "Y");
    CHECK_FALSE(bad.valid);
    REQUIRE(bad.witness_node);
    CHECK(*bad.witness_node == "D");
  }
  {
    const auto d = graph_of("d");
    CHECK(is_valid_adjustment(d, {}, all_causes(d), "Y").valid);
    const auto m = is_valid_adjustment(d, {"M"}, all_causes(d), "Y");
    CHECK_FALSE(m.valid);
    REQUIRE(m.witness_path);
    CHECK(m.witness_path->nodes.back() == "Y");
  }
  {
    const auto c = graph_of("c");
    CHECK_FALSE(is_valid_adjustment(c, {"U", "C"}, {"A_5"}, "Y").valid);
    CHECK(is_valid_adjustment(c, {"U"}, {"A_5"}, "Y").valid);
  }
}

TEST_CASE("adjustment criterion agrees with the back-door check for a single cause") {
  // For one cause with no descendants in z, validity equals: z blocks every
  // path from the cause to Y in the graph with the cause's out-edges removed.
  RandomStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(5);
    const CausalGraph base = oracle::random_dag(rng, n, 0.4);
    const std::size_t x = 1 + rng.below(n - 1);
    std::vector<scm::Node> nodes = base.nodes();
    nodes[x].role = Role::cause;
    const CausalGraph g(nodes, base.edges(), {nodes[x].name});
    const auto desc = g.descendants({x});
    if (!desc[0]) continue;  // outcome unreachable: criterion degenerates
    std::vector<std::string> z;
    for (std::size_t v = 1; v < n; ++v) {
      if (v != x && !desc[v] && rng.below(2)) z.push_back(g.name(v));
    }
    std::vector<scm::Edge> cut;
    for (const auto& e : g.edges()) {
      if (e.first != g.name(x)) cut.push_back(e);
    }
    const CausalGraph backdoor(nodes, cut, {nodes[x].name});
    const bool blocked = oracle::d_separated_by_paths(backdoor, {x}, {0}, backdoor.indices(z));
    CHECK(is_valid_adjustment(g, z, {g.name(x)}, g.name(0)).valid == blocked);
  }
}

TEST_CASE("assumption checklist") {
  const auto a = graph_of("a");
  const auto ra = check_assumptions(a, all_causes(a), "Y", {});
  CHECK_FALSE(ra.condition(4).holds);
  CHECK(ra.condition(4).witness.find("A_1") != std::string::npos);
  CHECK(ra.condition(4).witness.find("R") != std::string::npos);
  CHECK(ra.condition(4).witness.find("A_2") != std::string::npos);

  const auto d = graph_of("d");
  const auto rd = check_assumptions(d, all_causes(d), "Y", {});
  CHECK_FALSE(rd.condition(3).holds);
  CHECK(rd.condition(3).witness == "U -> M <- V");

  // Shared latent parent only.
  const CausalGraph clean({{"U", Role::latent}, {"A_1", Role::cause}, {"A_2", Role::cause}, {"Y", Role::outcome}},
                          {{"U", "A_1"}, {"U", "A_2"}, {"U", "Y"}, {"A_1", "Y"}, {"A_2", "Y"}}, {"A_1", "A_2"});
  CHECK(check_assumptions(clean, {"A_1", "A_2"}, "Y", {}).all_hold());

  const auto e = graph_of("e");
  CHECK_FALSE(check_assumptions(e, all_causes(e), "Y", {}).condition(1).holds);
  const auto b = graph_of("b");
  CHECK_FALSE(check_assumptions(b, all_causes(b), "Y", {"D"}).condition(5).holds);
}

TEST_CASE("graph report text") {
  const auto d = graph_of("d");
  const auto r = graph_report(d, all_causes(d), "Y", {"M"});
  CHECK_FALSE(r.adjustment.valid);
  const std::string text = r.to_text();
  CHECK(text.find("adjustment set: INVALID") != std::string::npos);
  CHECK(text.find("M: m-bias-collider") != std::string::npos);
}

}  // TEST_SUITE
