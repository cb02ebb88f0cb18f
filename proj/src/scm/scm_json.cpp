#include "deconlab/scm_json.hpp"

#include "deconlab/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace deconlab::scm {
namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(number(x, where));
  return out;
}

std::map<std::string, double> weight_map(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where + ": weights must be an object");
  std::map<std::string, double> out;
  for (auto it = v.begin(); it != v.end(); ++it) out[it.key()] = number(it.value(), where + ".weights." + it.key());
  return out;
}

Mechanism mechanism_from_json(const json& m, const std::string& where) {
  if (!m.is_object()) throw ConfigError(where + ": mechanism must be an object");
  const json& form_v = field(m, "form", where);
  if (!form_v.is_string()) throw ConfigError(where + ".form: expected a string");
  const std::string form = form_v.get<std::string>();
  if (form == "linear-gaussian") {
    require_known_keys(m, {"form", "weights", "intercept", "noise_sd"}, where);
    LinearGaussian lg;
    if (m.contains("weights")) lg.weights = weight_map(m["weights"], where);
    if (m.contains("intercept")) lg.intercept = number(m["intercept"], where + ".intercept");
    if (m.contains("noise_sd")) lg.noise_sd = number(m["noise_sd"], where + ".noise_sd");
    return lg;
  }
  if (form == "bernoulli-logistic") {
    require_known_keys(m, {"form", "weights", "intercept"}, where);
    BernoulliLogistic bl;
    if (m.contains("weights")) bl.weights = weight_map(m["weights"], where);
    if (m.contains("intercept")) bl.intercept = number(m["intercept"], where + ".intercept");
    return bl;
  }
  if (form == "uniform") {
    require_known_keys(m, {"form", "lo", "hi"}, where);
    return Uniform{number(field(m, "lo", where), where + ".lo"), number(field(m, "hi", where), where + ".hi")};
  }
  if (form == "two-point") {
    require_known_keys(m, {"form", "values", "prob"}, where);
    const auto vals = numbers(field(m, "values", where), where + ".values");
    if (vals.size() != 2) throw ConfigError(where + ".values: expected exactly two values");
    return TwoPoint{{vals[0], vals[1]}, number(field(m, "prob", where), where + ".prob")};
  }
  if (form == "categorical-indicator") {
    require_known_keys(m, {"form", "probs"}, where);
    return CategoricalIndicator{numbers(field(m, "probs", where), where + ".probs")};
  }
  if (form == "table") {
    require_known_keys(m, {"form", "parents", "rows"}, where);
    Table t;
    const json& ps = field(m, "parents", where);
    if (!ps.is_array()) throw ConfigError(where + ".parents: expected an array");
    for (const auto& p : ps) {
      if (!p.is_string()) throw ConfigError(where + ".parents: expected strings");
      t.parents.push_back(p.get<std::string>());
    }
    const json& rows = field(m, "rows", where);
    if (!rows.is_array()) throw ConfigError(where + ".rows: expected an array");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rw = where + ".rows[" + std::to_string(r) + "]";
      require_known_keys(rows[r], {"given", "values", "probs"}, rw);
      t.rows.push_back({numbers(field(rows[r], "given", rw), rw + ".given"),
                        numbers(field(rows[r], "values", rw), rw + ".values"),
                        numbers(field(rows[r], "probs", rw), rw + ".probs")});
    }
    return t;
  }
  throw ConfigError(where + ".form: unknown mechanism form '" + form + "'");
}

json mechanism_to_json(const Mechanism& mech) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        json out;
        if constexpr (std::is_same_v<T, LinearGaussian>) {
          out = {{"form", "linear-gaussian"}, {"weights", json(m.weights)},
                 {"intercept", m.intercept}, {"noise_sd", m.noise_sd}};
        } else if constexpr (std::is_same_v<T, BernoulliLogistic>) {
          out = {{"form", "bernoulli-logistic"}, {"weights", json(m.weights)}, {"intercept", m.intercept}};
        } else if constexpr (std::is_same_v<T, Uniform>) {
          out = {{"form", "uniform"}, {"lo", m.lo}, {"hi", m.hi}};
        } else if constexpr (std::is_same_v<T, TwoPoint>) {
          out = {{"form", "two-point"}, {"values", {m.values[0], m.values[1]}}, {"prob", m.prob}};
        } else if constexpr (std::is_same_v<T, CategoricalIndicator>) {
          out = {{"form", "categorical-indicator"}, {"probs", m.probs}};
        } else if constexpr (std::is_same_v<T, Table>) {
          json rows = json::array();
          for (const auto& r : m.rows) rows.push_back({{"given", r.given}, {"values", r.values}, {"probs", r.probs}});
          out = {{"form", "table"}, {"parents", m.parents}, {"rows", rows}};
        }
        return out;
      },
      mech);
}

}  // namespace

void require_known_keys(const json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

Scm scm_from_json(const json& doc) {
  require_known_keys(doc, {"nodes", "edges", "cause_order", "seed"}, "scm");
  const json& nodes_v = field(doc, "nodes", "scm");
  if (!nodes_v.is_array()) throw ConfigError("scm.nodes: expected an array");

  std::vector<Node> nodes;
  std::map<std::string, Mechanism> mechanisms;
  for (std::size_t i = 0; i < nodes_v.size(); ++i) {
    const std::string where = "scm.nodes[" + std::to_string(i) + "]";
    const json& nv = nodes_v[i];
    require_known_keys(nv, {"name", "role", "mechanism"}, where);
    const json& name = field(nv, "name", where);
    const json& role = field(nv, "role", where);
    if (!name.is_string() || !role.is_string()) throw ConfigError(where + ": name and role must be strings");
    nodes.push_back({name.get<std::string>(), role_from_string(role.get<std::string>())});
    mechanisms.emplace(nodes.back().name, mechanism_from_json(field(nv, "mechanism", where), where + ".mechanism"));
  }

  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    const json& ev = doc["edges"];
    if (!ev.is_array()) throw ConfigError("scm.edges: expected an array");
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const json& e = ev[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
        throw ConfigError("scm.edges[" + std::to_string(i) + "]: expected [parent, child]");
      }
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }

  std::vector<std::string> causes;
  if (doc.contains("cause_order")) {
    const json& cv = doc["cause_order"];
    if (!cv.is_array()) throw ConfigError("scm.cause_order: expected an array");
    for (const auto& c : cv) {
      if (!c.is_string()) throw ConfigError("scm.cause_order: expected strings");
      causes.push_back(c.get<std::string>());
    }
  }

  std::uint64_t seed = 0;
  if (doc.contains("seed")) {
    const json& s = doc["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("scm.seed: expected a non-negative integer");
    }
    seed = s.get<std::uint64_t>();
  }
  return Scm(CausalGraph(std::move(nodes), std::move(edges), std::move(causes)), std::move(mechanisms), seed);
}

json scm_to_json(const Scm& scm) {
  const auto& g = scm.graph();
  json nodes = json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    nodes.push_back({{"name", g.name(i)},
                     {"role", std::string(to_string(g.node(i).role))},
                     {"mechanism", mechanism_to_json(scm.mechanism(i))}});
  }
  json edges = json::array();
  for (const auto& [p, c] : g.edges()) edges.push_back({p, c});
  return {{"nodes", nodes}, {"edges", edges}, {"cause_order", g.cause_order()}, {"seed", scm.seed()}};
}

Scm parse_scm(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scm document is not valid JSON: ") + e.what());
  }
  return scm_from_json(doc);
}

std::string dump_scm(const Scm& scm) { return scm_to_json(scm).dump(2) + "\n"; }

Scm load_scm_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scm file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scm(ss.str());
}

}  // namespace deconlab::scm
