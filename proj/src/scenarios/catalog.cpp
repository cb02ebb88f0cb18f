#include "deconlab/scenarios.hpp"

#include "deconlab/errors.hpp"

#include <algorithm>

namespace deconlab::scenarios {

using scm::Role;

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::unbiased: return "unbiased";
    case Verdict::biased: return "biased";
    case Verdict::degenerate: return "degenerate";
    case Verdict::unchecked: return "unchecked";
  }
  return "?";
}

Verdict verdict_from_string(std::string_view text) {
  if (text == "unbiased") return Verdict::unbiased;
  if (text == "biased") return Verdict::biased;
  if (text == "degenerate") return Verdict::degenerate;
  if (text == "unchecked") return Verdict::unchecked;
  throw ConfigError("unknown verdict '" + std::string(text) + "'");
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"a", "cause A_1 drives a mediator R of the other causes; adjusting for R blocks part of the effect of A_1",
       std::nullopt, 3, false},
      {"b", "multi-cause confounder U plus a mediator D downstream of A_m alone", 5, 0, true},
      {"c", "multi-cause confounder U plus a collider C of A_m and Y", 5, 0, true},
      {"d", "pre-treatment collider M between the confounder U of the causes and a parent V of Y", 5, 0, false},
      {"e", "confounder U = V + W where V drives A_1 only and W drives A_2 only; Z is an observed stratifier of both",
       std::nullopt, 2, false},
      {"f", "two-cluster population structure G shifting every cause and the outcome", 10, 0, false},
      {"g", "one gaussian confounder loading on many causes and the outcome", 20, 0, false},
  };
  return entries;
}

const CatalogEntry& catalog_entry(std::string_view id) {
  for (const auto& e : catalog()) {
    if (e.id == id) return e;
  }
  throw ConfigError("unknown scenario '" + std::string(id) + "'");
}

namespace {

std::string cause(std::size_t j) { return "A_" + std::to_string(j); }

// Collects nodes and weighted edges, then assembles the Scm.
class Builder {
 public:
  void node(const std::string& name, Role role, scm::Mechanism mech = scm::LinearGaussian{}) {
    nodes_.push_back({name, role});
    mech_[name] = std::move(mech);
    if (role == Role::cause) causes_.push_back(name);
  }
  void edge(const std::string& from, const std::string& to, double w = 1.0) {
    edges_.push_back({from, to});
    auto* lg = std::get_if<scm::LinearGaussian>(&mech_.at(to));
    if (lg) lg->weights[from] = w;
  }
  scm::LinearGaussian& lg(const std::string& name) { return std::get<scm::LinearGaussian>(mech_.at(name)); }

  void apply(const std::map<std::string, double>& overrides) {
    for (const auto& [key, value] : overrides) {
      const auto colon = key.find(':');
      if (colon == std::string::npos) throw ConfigError("override key '" + key + "' has no kind prefix");
      const std::string kind = key.substr(0, colon);
      const std::string target = key.substr(colon + 1);
      if (kind == "w") {
        const auto arrow = target.find("->");
        if (arrow == std::string::npos) throw ConfigError("weight override '" + key + "' must name an edge P->C");
        const std::string from = target.substr(0, arrow);
        const std::string to = target.substr(arrow + 2);
        if (std::find(edges_.begin(), edges_.end(), scm::Edge{from, to}) == edges_.end()) {
          throw ConfigError("override '" + key + "' names an edge that is not in the graph");
        }
        lg_for(to, key).weights[from] = value;
      } else if (kind == "sd") {
        if (!(value >= 0.0)) throw ConfigError("override '" + key + "' must be >= 0");
        lg_for(target, key).noise_sd = value;
      } else if (kind == "b") {
        lg_for(target, key).intercept = value;
      } else {
        throw ConfigError("unknown override kind in '" + key + "' (expected w:, sd: or b:)");
      }
    }
  }

  scm::Scm build() const {
    return scm::Scm(scm::CausalGraph(nodes_, edges_, causes_), mech_, 0);
  }

 private:
  scm::LinearGaussian& lg_for(const std::string& name, const std::string& key) {
    auto it = mech_.find(name);
    if (it == mech_.end()) throw ConfigError("override '" + key + "' names an unknown node");
    auto* lg = std::get_if<scm::LinearGaussian>(&it->second);
    if (!lg) throw ConfigError("override '" + key + "' targets a node that is not linear-gaussian");
    return *lg;
  }

  std::vector<scm::Node> nodes_;
  std::vector<scm::Edge> edges_;
  std::vector<std::string> causes_;
  std::map<std::string, scm::Mechanism> mech_;
};

struct Layout {
  Builder b;
  std::vector<std::string> subset;
  bool adjust_other_causes = false;
  std::vector<std::string> oracle;
  std::vector<EstimatorEntry> estimators;
};

Layout scenario_a() {
  Layout l;
  auto& b = l.b;
  b.node("U", Role::latent);
  b.node("V", Role::latent);
  for (std::size_t j = 1; j <= 3; ++j) b.node(cause(j), Role::cause);
  b.node("R", Role::auxiliary);
  b.node("Y", Role::outcome);
  b.edge("U", "A_1");
  b.edge("U", "A_2");
  b.edge("U", "Y");
  b.edge("A_1", "R");
  b.edge("R", "A_2");
  b.edge("R", "A_3");
  b.edge("R", "Y");
  b.edge("V", "R");
  b.edge("V", "Y");
  b.edge("A_2", "Y");
  b.edge("A_3", "Y");
  l.subset = {"A_1"};
  l.oracle = {"U"};
  l.estimators = {{"naive", Verdict::biased},
                  {"oracle[U]", Verdict::unbiased},
                  {"adjusted[U+R]", Verdict::biased},
                  {"adjusted[R]", Verdict::biased},
                  {"substitute[ppca:1]", Verdict::unchecked}};
  return l;
}

Layout scenario_b(std::size_t m, bool dashed) {
  Layout l;
  auto& b = l.b;
  b.node("U", Role::latent);
  for (std::size_t j = 1; j <= m; ++j) b.node(cause(j), Role::cause);
  b.node("D", Role::auxiliary);
  b.node("Y", Role::outcome);
  for (std::size_t j = 1; j <= m; ++j) b.edge("U", cause(j));
  b.edge("U", "Y");
  b.edge(cause(m), "D");
  b.edge("D", "Y");
  if (dashed) b.edge("U", "D");
  l.subset = {cause(m)};
  l.oracle = {"U"};
  l.estimators = {{"naive", Verdict::biased},
                  {"oracle[U]", Verdict::unbiased},
                  {"adjusted[U+D]", Verdict::biased},
                  {"substitute[ppca:1]", Verdict::unchecked}};
  return l;
}

Layout scenario_c(std::size_t m, bool dashed) {
  Layout l;
  auto& b = l.b;
  b.node("U", Role::latent);
  for (std::size_t j = 1; j <= m; ++j) b.node(cause(j), Role::cause);
  b.node("Y", Role::outcome);
  b.node("C", Role::auxiliary);
  for (std::size_t j = 1; j <= m; ++j) b.edge("U", cause(j));
  b.edge("U", "Y");
  b.edge(cause(m), "C");
  b.edge("Y", "C");
  if (dashed) b.edge("U", "C");
  l.subset = {cause(m)};
  l.oracle = {"U"};
  l.estimators = {{"naive", Verdict::biased},
                  {"oracle[U]", Verdict::unbiased},
                  {"adjusted[U+C]", Verdict::biased},
                  {"substitute[ppca:1]", Verdict::unchecked}};
  return l;
}

Layout scenario_d(std::size_t m) {
  Layout l;
  auto& b = l.b;
  b.node("U", Role::latent);
  b.node("V", Role::latent);
  for (std::size_t j = 1; j <= m; ++j) b.node(cause(j), Role::cause);
  b.node("M", Role::auxiliary);
  b.node("Y", Role::outcome);
  for (std::size_t j = 1; j <= m; ++j) b.edge("U", cause(j));
  b.edge("U", "M");
  b.edge("V", "M");
  b.edge("V", "Y");
  l.subset = {cause(m)};
  l.oracle = {"U"};
  l.estimators = {{"naive", Verdict::unbiased},
                  {"oracle[U]", Verdict::unbiased},
                  {"adjusted[M]", Verdict::biased},
                  {"substitute[ppca:1]", Verdict::unchecked}};
  return l;
}

Layout scenario_e() {
  Layout l;
  auto& b = l.b;
  b.node("V", Role::latent, scm::TwoPoint{{0.0, 0.5}, 0.5});
  b.node("W", Role::latent, scm::Uniform{0.0, 0.5});
  b.node("U", Role::latent, scm::LinearGaussian{{}, 0.0, 0.0});
  b.node("Z", Role::auxiliary, scm::TwoPoint{{0.0, 1.0}, 0.5});
  b.node("A_1", Role::cause);
  b.node("A_2", Role::cause);
  b.node("Y", Role::outcome);
  b.edge("V", "U");
  b.edge("W", "U");
  b.edge("V", "A_1");
  b.edge("W", "A_2");
  b.edge("Z", "A_1", 6.0);
  b.edge("Z", "A_2", 6.0);
  b.edge("U", "Y");
  l.subset = {"A_1", "A_2"};
  l.oracle = {"U"};
  l.estimators = {{"naive", Verdict::biased},
                  {"oracle[U]", Verdict::unbiased},
                  {"adjusted[Z]", Verdict::biased},
                  {"substitute[mixture:2]", Verdict::biased}};
  return l;
}

Layout scenario_f(std::size_t m) {
  Layout l;
  auto& b = l.b;
  b.node("G", Role::latent, scm::CategoricalIndicator{{0.5, 0.5}});
  for (std::size_t j = 1; j <= m; ++j) b.node(cause(j), Role::cause);
  b.node("Y", Role::outcome);
  for (std::size_t j = 1; j <= m; ++j) {
    b.edge("G", cause(j));
    b.edge(cause(j), "Y");
  }
  b.edge("G", "Y", 2.0);
  l.subset = {"A_1"};
  l.adjust_other_causes = true;
  l.oracle = {"G"};
  l.estimators = {{"naive", Verdict::biased},
                  {"oracle[G]", Verdict::unbiased},
                  {"substitute[mixture:2]", Verdict::unbiased}};
  return l;
}

Layout scenario_g(std::size_t m) {
  Layout l;
  auto& b = l.b;
  b.node("U", Role::latent);
  for (std::size_t j = 1; j <= m; ++j) b.node(cause(j), Role::cause);
  b.node("Y", Role::outcome);
  for (std::size_t j = 1; j <= m; ++j) {
    b.edge("U", cause(j));
    b.edge(cause(j), "Y");
  }
  b.edge("U", "Y");
  l.subset = {"A_1"};
  l.adjust_other_causes = true;
  l.oracle = {"U"};
  l.estimators = {{"naive", Verdict::biased},
                  {"oracle[U]", Verdict::unbiased},
                  {"substitute[ppca:1]", Verdict::degenerate}};
  return l;
}

}  // namespace

Scenario build_scenario(std::string_view id, const Params& params) {
  const CatalogEntry& entry = catalog_entry(id);
  std::size_t m = entry.fixed_m;
  if (entry.default_m) {
    m = params.m.value_or(*entry.default_m);
    const std::size_t min_m = id == "f" || id == "g" ? 2 : 1;
    if (m < min_m) throw ConfigError("scenario " + entry.id + " needs m >= " + std::to_string(min_m));
  } else if (params.m && *params.m != entry.fixed_m) {
    throw ConfigError("scenario " + entry.id + " has a fixed number of causes (m = " + std::to_string(entry.fixed_m) + ")");
  }
  if (params.dashed && !entry.has_dashed) throw ConfigError("scenario " + entry.id + " has no dashed edge");

  Layout l;
  if (id == "a") l = scenario_a();
  else if (id == "b") l = scenario_b(m, params.dashed);
  else if (id == "c") l = scenario_c(m, params.dashed);
  else if (id == "d") l = scenario_d(m);
  else if (id == "e") l = scenario_e();
  else if (id == "f") l = scenario_f(m);
  else l = scenario_g(m);
  l.b.apply(params.overrides);

  Scenario s{entry.id, entry.description, l.b.build(), m, estimate::unit_contrast(l.subset, l.adjust_other_causes),
             0.0, l.oracle, l.estimators};
  s.truth = scm::true_ace_path_trace(s.scm, s.estimand.a, s.estimand.a_prime);
  return s;
}

Verdict expected_verdict(std::string_view id, std::string_view estimator_label) {
  const Scenario s = build_scenario(id);
  for (const auto& e : s.estimators) {
    if (e.label == estimator_label) return e.expected;
  }
  return Verdict::unchecked;
}

}  // namespace deconlab::scenarios
