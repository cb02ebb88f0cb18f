#include "deconlab/deconlab.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerdict = 3;

int report(dl_status status) {
  std::cerr << "deconlab: " << dl_last_error() << "\n";
  switch (status) {
    case DL_E_CONFIG:
    case DL_E_ARGUMENT: return kExitConfig;
    case DL_E_VERDICT: return kExitVerdict;
    default: return kExitRuntime;
  }
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::uint64_t> parse_seed(const std::string& text) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos, 0);
    if (pos != text.size()) return std::nullopt;
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int cmd_run(const std::string& config_path, const std::string& out, const std::optional<std::string>& seed_flag,
            std::size_t jobs) {
  const auto text = read_file(config_path);
  if (!text) {
    std::cerr << "deconlab: cannot read config file '" << config_path << "'\n";
    return kExitConfig;
  }
  // --seed beats DECONLAB_SEED beats the config's own seed.
  std::optional<std::uint64_t> seed;
  if (const char* env = std::getenv("DECONLAB_SEED"); env && *env) {
    seed = parse_seed(env);
    if (!seed) {
      std::cerr << "deconlab: DECONLAB_SEED is not an unsigned integer\n";
      return kExitConfig;
    }
  }
  if (seed_flag) {
    seed = parse_seed(*seed_flag);
    if (!seed) {
      std::cerr << "deconlab: --seed is not an unsigned integer\n";
      return kExitConfig;
    }
  }
  dl_results* results = nullptr;
  if (dl_status s = dl_experiment_run(text->c_str(), seed ? &*seed : nullptr, jobs, &results); s != DL_OK) {
    return report(s);
  }
  std::string path = out;
  if (path.empty()) path = dl_results_output_path(results);
  if (path.empty()) path = "results.csv";
  const dl_status s = dl_results_write(results, path.c_str());
  const std::size_t rows = dl_results_row_count(results);
  dl_results_free(results);
  if (s != DL_OK) return report(s);
  std::cout << "wrote " << rows << " rows to " << path << "\n";
  return kExitOk;
}

int cmd_check_graph(const std::string& file, const std::string& treatments, const std::string& outcome,
                    const std::string& adjust) {
  dl_scm* scm = nullptr;
  if (dl_status s = dl_scm_load_file(file.c_str(), &scm); s != DL_OK) return report(s);
  dl_graph_report* rep = nullptr;
  const dl_status s = dl_check_graph(scm, treatments.c_str(), outcome.c_str(), adjust.c_str(), &rep);
  dl_scm_free(scm);
  if (s != DL_OK) return report(s);
  std::cout << dl_graph_report_text(rep);
  const bool valid = dl_graph_report_valid(rep) != 0;
  dl_graph_report_free(rep);
  return valid ? kExitOk : kExitVerdict;
}

int cmd_summarize(const std::string& file, bool assert_pass, bool as_json) {
  dl_summary* summary = nullptr;
  if (dl_status s = dl_summarize_file(file.c_str(), &summary); s != DL_OK) return report(s);
  std::cout << (as_json ? dl_summary_json(summary) : dl_summary_text(summary));
  if (as_json) std::cout << "\n";
  const bool pass = dl_summary_all_pass(summary) != 0;
  dl_summary_free(summary);
  if (assert_pass && !pass) {
    std::cerr << "deconlab: at least one verdict disagrees with the scenario expectation\n";
    return kExitVerdict;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for substitute-confounder adjustment"};
  app.set_version_flag("--version", std::string(dl_version()));
  app.require_subcommand(1);

  std::string config_path, out;
  std::optional<std::string> seed;
  std::size_t jobs = 1;
  auto* run = app.add_subcommand("run", "run a simulation experiment");
  run->add_option("--config", config_path, "experiment configuration (JSON)")->required();
  run->add_option("--out", out, "results path (default: config output, else results.csv)");
  run->add_option("--seed", seed, "base seed, overrides DECONLAB_SEED and the config");
  run->add_option("--jobs", jobs, "worker threads, 0 = all cores")->capture_default_str();

  auto* scen = app.add_subcommand("scenarios", "inspect the scenario catalog");
  scen->require_subcommand(1);
  auto* list = scen->add_subcommand("list", "list scenario ids and descriptions");
  std::string export_dir;
  auto* exp = scen->add_subcommand("export", "write every scenario as an SCM JSON file");
  exp->add_option("--dir", export_dir, "target directory")->required();

  std::string file, treatments, outcome, adjust;
  auto* check = app.add_subcommand("check-graph", "check an adjustment set against a causal graph");
  check->add_option("--file", file, "SCM JSON file")->required();
  check->add_option("--treatments", treatments, "comma-separated treatment nodes")->required();
  check->add_option("--outcome", outcome, "outcome node")->required();
  check->add_option("--adjust", adjust, "comma-separated adjustment set (may be empty)");

  std::string results_path;
  bool assert_pass = false, as_json = false;
  auto* summ = app.add_subcommand("summarize", "summarize a results CSV against expected verdicts");
  summ->add_option("results", results_path, "results CSV")->required();
  summ->add_flag("--assert", assert_pass, "exit 3 when any verdict disagrees with its expectation");
  summ->add_flag("--json", as_json, "print the machine-readable summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*run) return cmd_run(config_path, out, seed, jobs);
  if (*list) {
    for (std::size_t i = 0; i < dl_scenario_count(); ++i) {
      std::cout << dl_scenario_id(i) << "  " << dl_scenario_description(i) << "\n";
    }
    return kExitOk;
  }
  if (*exp) {
    if (dl_status s = dl_scenarios_export(export_dir.c_str()); s != DL_OK) return report(s);
    std::cout << "wrote " << dl_scenario_count() << " scenario files to " << export_dir << "\n";
    return kExitOk;
  }
  if (*check) return cmd_check_graph(file, treatments, outcome, adjust);
  if (*summ) return cmd_summarize(results_path, assert_pass, as_json);
  return kExitConfig;
}
