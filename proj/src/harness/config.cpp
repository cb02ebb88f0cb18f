#include "deconlab/errors.hpp"
#include "deconlab/harness.hpp"
#include "deconlab/rng.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace deconlab::harness {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) fail(path + "." + key, "unknown key");
  }
}

std::size_t natural(const json& v, const std::string& path, std::size_t min) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "must be an integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) fail(path, "must be non-negative");
  const std::size_t x = v.get<std::size_t>();
  if (x < min) fail(path, "must be >= " + std::to_string(min));
  return x;
}

double real(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "must be a number");
  return v.get<double>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "must be true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> natural_list(const json& v, const std::string& path, std::size_t min) {
  std::vector<std::size_t> out;
  if (!v.is_array()) {
    out.push_back(natural(v, path, min));
    return out;
  }
  if (v.empty()) fail(path, "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(natural(v[i], path + "[" + std::to_string(i) + "]", min));
  return out;
}

factor::FactorModelSpec factor_spec(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "must be an object");
  reject_unknown(v, {"family", "k", "max_iters", "rel_tol", "init_seed", "standardize"}, path);
  factor::FactorModelSpec spec;
  if (!v.contains("family")) fail(path + ".family", "is required");
  try {
    spec.family = factor::family_from_string(text(v["family"], path + ".family"));
  } catch (const ConfigError& e) {
    fail(path + ".family", e.what());
  }
  if (v.contains("k")) spec.k = natural(v["k"], path + ".k", 1);
  if (v.contains("max_iters")) spec.max_iters = natural(v["max_iters"], path + ".max_iters", 1);
  if (v.contains("rel_tol")) {
    spec.rel_tol = real(v["rel_tol"], path + ".rel_tol");
    if (!(spec.rel_tol > 0.0)) fail(path + ".rel_tol", "must be > 0");
  }
  if (v.contains("init_seed")) spec.init_seed = v["init_seed"].get<std::uint64_t>();
  if (v.contains("standardize")) spec.standardize = boolean(v["standardize"], path + ".standardize");
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  const std::string root = "config";
  if (!doc.is_object()) fail(root, "must be a JSON object");
  reject_unknown(doc,
                 {"scenario", "overrides", "dashed", "n", "m", "factor_models", "estimators", "replicates", "seed",
                  "bootstrap", "alpha", "interactions", "output", "format"},
                 root);
  ExperimentConfig c;
  if (!doc.contains("scenario")) fail(root + ".scenario", "is required");
  const json& sc = doc["scenario"];
  if (sc.is_string()) {
    c.scenarios.push_back(sc.get<std::string>());
  } else if (sc.is_array() && !sc.empty()) {
    for (std::size_t i = 0; i < sc.size(); ++i) c.scenarios.push_back(text(sc[i], root + ".scenario[" + std::to_string(i) + "]"));
  } else {
    fail(root + ".scenario", "must be a scenario id or a non-empty list of ids");
  }
  for (std::size_t i = 0; i < c.scenarios.size(); ++i) {
    try {
      scenarios::catalog_entry(c.scenarios[i]);
    } catch (const ConfigError& e) {
      fail(root + ".scenario[" + std::to_string(i) + "]", e.what());
    }
  }
  if (doc.contains("overrides")) {
    const json& ov = doc["overrides"];
    if (!ov.is_object()) fail(root + ".overrides", "must be an object of key: number");
    for (const auto& [key, value] : ov.items()) c.overrides[key] = real(value, root + ".overrides." + key);
  }
  if (doc.contains("dashed")) c.dashed = boolean(doc["dashed"], root + ".dashed");
  if (!doc.contains("n")) fail(root + ".n", "is required");
  c.n = natural_list(doc["n"], root + ".n", 10);
  if (doc.contains("m")) c.m = natural_list(doc["m"], root + ".m", 1);
  if (doc.contains("factor_models")) {
    const json& fm = doc["factor_models"];
    if (!fm.is_array()) fail(root + ".factor_models", "must be a list");
    for (std::size_t i = 0; i < fm.size(); ++i) {
      c.factor_models.push_back(factor_spec(fm[i], root + ".factor_models[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("estimators")) {
    const json& es = doc["estimators"];
    if (!es.is_array() || es.empty()) fail(root + ".estimators", "must be a non-empty list of labels");
    c.estimators.clear();
    for (std::size_t i = 0; i < es.size(); ++i) c.estimators.push_back(text(es[i], root + ".estimators[" + std::to_string(i) + "]"));
  }
  if (!doc.contains("replicates")) fail(root + ".replicates", "is required");
  c.replicates = natural(doc["replicates"], root + ".replicates", 1);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) fail(root + ".seed", "must be an integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("bootstrap")) c.bootstrap = natural(doc["bootstrap"], root + ".bootstrap", 0);
  if (doc.contains("alpha")) {
    c.alpha = real(doc["alpha"], root + ".alpha");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail(root + ".alpha", "must lie in (0, 1)");
  }
  if (doc.contains("interactions")) c.interactions = boolean(doc["interactions"], root + ".interactions");
  if (doc.contains("output")) c.output = text(doc["output"], root + ".output");
  if (doc.contains("format")) {
    c.format = text(doc["format"], root + ".format");
    if (c.format != "csv" && c.format != "json") fail(root + ".format", "must be csv or json");
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json config_to_json(const ExperimentConfig& c) {
  json fm = json::array();
  for (const auto& s : c.factor_models) {
    fm.push_back({{"family", std::string(factor::to_string(s.family))},
                  {"k", s.k},
                  {"max_iters", s.max_iters},
                  {"rel_tol", s.rel_tol},
                  {"init_seed", s.init_seed},
                  {"standardize", s.standardize}});
  }
  json doc = {{"scenario", c.scenarios},
              {"overrides", c.overrides},
              {"dashed", c.dashed},
              {"n", c.n},
              {"factor_models", fm},
              {"estimators", c.estimators},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"bootstrap", c.bootstrap},
              {"alpha", c.alpha},
              {"interactions", c.interactions},
              {"format", c.format}};
  if (!c.m.empty()) doc["m"] = c.m;
  if (!c.output.empty()) doc["output"] = c.output;
  return doc;
}

std::string config_hash(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.output.clear();  // where results go does not change them
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_to_json(c).dump())));
  return buf;
}

}  // namespace deconlab::harness
