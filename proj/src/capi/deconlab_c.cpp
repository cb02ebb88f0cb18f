#include "deconlab/deconlab.h"

#include "deconlab/errors.hpp"
#include "deconlab/graph_analysis.hpp"
#include "deconlab/harness.hpp"
#include "deconlab/scenarios.hpp"
#include "deconlab/scm_json.hpp"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

struct dl_scm {
  deconlab::scm::Scm scm;
};

struct dl_graph_report {
  bool valid;
  std::string text;
};

struct dl_results {
  deconlab::harness::ExperimentConfig config;
  deconlab::harness::ResultsTable table;
  deconlab::harness::RunInfo info;
};

struct dl_summary {
  deconlab::harness::Summary summary;
  std::string text;
  std::string json;
};

namespace {

thread_local std::string last_error;

dl_status fail(dl_status code, const std::string& message) {
  last_error = message;
  return code;
}

// Runs f, mapping exceptions to status codes.
template <class F>
dl_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return DL_OK;
  } catch (const deconlab::ConfigError& e) {
    return fail(DL_E_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DL_E_RUNTIME, "out of memory");
  } catch (const nlohmann::json::exception& e) {
    return fail(DL_E_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(DL_E_RUNTIME, e.what());
  } catch (...) {
    return fail(DL_E_RUNTIME, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_names(const char* text) {
  std::vector<std::string> out;
  if (!text) return out;
  std::string cur;
  for (const char* p = text;; ++p) {
    if (*p == ',' || *p == '\0') {
      std::size_t b = cur.find_first_not_of(" \t");
      std::size_t e = cur.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
      cur.clear();
      if (*p == '\0') break;
    } else {
      cur += *p;
    }
  }
  return out;
}

deconlab::scenarios::Params params_from(const char* json_text) {
  deconlab::scenarios::Params p;
  if (!json_text || !*json_text) return p;
  const auto doc = nlohmann::json::parse(json_text);
  deconlab::scm::require_known_keys(doc, {"m", "dashed", "overrides"}, "scenario params");
  if (doc.contains("m")) p.m = doc["m"].get<std::size_t>();
  if (doc.contains("dashed")) p.dashed = doc["dashed"].get<bool>();
  if (doc.contains("overrides")) p.overrides = doc["overrides"].get<std::map<std::string, double>>();
  return p;
}

}  // namespace

extern "C" {

const char* dl_version(void) { return deconlab::harness::kVersion; }

const char* dl_last_error(void) { return last_error.c_str(); }

void dl_string_free(char* s) { std::free(s); }

dl_status dl_scm_load_file(const char* path, dl_scm** out) {
  if (!path || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] { *out = new dl_scm{deconlab::scm::load_scm_file(path)}; });
}

dl_status dl_scm_load_json(const char* text, dl_scm** out) {
  if (!text || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] { *out = new dl_scm{deconlab::scm::parse_scm(text)}; });
}

dl_status dl_scm_to_json(const dl_scm* scm, char** out) {
  if (!scm || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] { *out = copy_string(deconlab::scm::dump_scm(scm->scm)); });
}

void dl_scm_free(dl_scm* scm) { delete scm; }

size_t dl_scenario_count(void) { return deconlab::scenarios::catalog().size(); }

const char* dl_scenario_id(size_t i) {
  const auto& c = deconlab::scenarios::catalog();
  return i < c.size() ? c[i].id.c_str() : nullptr;
}

const char* dl_scenario_description(size_t i) {
  const auto& c = deconlab::scenarios::catalog();
  return i < c.size() ? c[i].description.c_str() : nullptr;
}

dl_status dl_scenario_build(const char* id, const char* params_json, dl_scm** out) {
  if (!id || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] { *out = new dl_scm{deconlab::scenarios::build_scenario(id, params_from(params_json)).scm}; });
}

dl_status dl_scenarios_export(const char* dir) {
  if (!dir) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] {
    const std::filesystem::path base(dir);
    if (!std::filesystem::is_directory(base)) throw deconlab::ConfigError("'" + base.string() + "' is not a directory");
    for (const auto& entry : deconlab::scenarios::catalog()) {
      const auto path = base / ("scenario_" + entry.id + ".json");
      std::ofstream f(path, std::ios::binary);
      f << deconlab::scm::dump_scm(deconlab::scenarios::build_scenario(entry.id).scm);
      if (!f) throw deconlab::Error("cannot write '" + path.string() + "'");
    }
  });
}

dl_status dl_check_graph(const dl_scm* scm, const char* treatments, const char* outcome, const char* adjust,
                         dl_graph_report** out) {
  if (!scm || !treatments || !outcome || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] {
    const auto t = split_names(treatments);
    if (t.empty()) throw deconlab::ConfigError("no treatments given");
    const auto report = deconlab::graph::graph_report(scm->scm.graph(), t, outcome, split_names(adjust));
    *out = new dl_graph_report{report.adjustment.valid, report.to_text()};
  });
}

int dl_graph_report_valid(const dl_graph_report* report) { return report && report->valid ? 1 : 0; }

const char* dl_graph_report_text(const dl_graph_report* report) { return report ? report->text.c_str() : ""; }

void dl_graph_report_free(dl_graph_report* report) { delete report; }

dl_status dl_experiment_run(const char* config_json, const uint64_t* seed_override, size_t jobs, dl_results** out) {
  if (!config_json || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] {
    auto config = deconlab::harness::parse_config_text(config_json);
    if (seed_override) config.seed = *seed_override;
    auto* r = new dl_results{config, {}, {}};
    try {
      r->table = deconlab::harness::run_experiment(config, jobs, &r->info);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

size_t dl_results_row_count(const dl_results* results) { return results ? results->table.rows.size() : 0; }

const char* dl_results_output_path(const dl_results* results) {
  return results ? results->config.output.c_str() : "";
}

dl_status dl_results_csv(const dl_results* results, char** out) {
  if (!results || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] { *out = copy_string(deconlab::harness::to_csv(results->table)); });
}

dl_status dl_results_write(const dl_results* results, const char* path) {
  if (!results || !path) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] { deconlab::harness::write_results(results->table, results->config, results->info, path); });
}

void dl_results_free(dl_results* results) { delete results; }

dl_status dl_summarize_file(const char* csv_path, dl_summary** out) {
  if (!csv_path || !out) return fail(DL_E_ARGUMENT, "null argument");
  return guarded([&] {
    auto summary = deconlab::harness::summarize(deconlab::harness::load_csv_file(csv_path));
    std::string text = summary.to_text();
    std::string json = summary.to_json().dump(2);
    *out = new dl_summary{std::move(summary), std::move(text), std::move(json)};
  });
}

const char* dl_summary_text(const dl_summary* summary) { return summary ? summary->text.c_str() : ""; }

const char* dl_summary_json(const dl_summary* summary) { return summary ? summary->json.c_str() : ""; }

int dl_summary_all_pass(const dl_summary* summary) { return summary && summary->summary.all_pass() ? 1 : 0; }

void dl_summary_free(dl_summary* summary) { delete summary; }

}  // extern "C"
