#pragma once

// Monte Carlo sweeps over (scenario, n, m, replicate), result tables and
// their summaries.

#include "deconlab/factor_models.hpp"
#include "deconlab/scenarios.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deconlab::harness {

inline constexpr const char* kVersion = "0.1.0";

/// JSON document, unknown keys rejected:
/// {
///   "scenario": "f" | ["a", "d"],
///   "overrides": {"w:G->Y": 2.0},      optional
///   "dashed": false,                   optional
///   "n": [5000],
///   "m": [2, 50],                      optional, scenario default when absent
///   "factor_models": [{"family": "mixture", "k": 2}],   optional
///   "estimators": ["all"],             optional; labels, "oracle", "substitute" or "all"
///   "replicates": 100,
///   "seed": 42,
///   "bootstrap": 200,                  optional
///   "alpha": 0.05,                     optional
///   "interactions": false,             optional
///   "output": "results.csv",           optional
///   "format": "csv" | "json"           optional
/// }
struct ExperimentConfig {
  std::vector<std::string> scenarios;
  std::map<std::string, double> overrides;
  bool dashed = false;
  std::vector<std::size_t> n;
  std::vector<std::size_t> m;
  std::vector<factor::FactorModelSpec> factor_models;
  std::vector<std::string> estimators{"all"};
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::size_t bootstrap = 200;
  double alpha = 0.05;
  bool interactions = false;
  std::string output;
  std::string format = "csv";
};

/// Errors name the offending path, e.g. "config.n[1]: must be >= 10".
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Hex FNV-1a of the canonical JSON form.
std::string config_hash(const ExperimentConfig& config);

struct ResultRow {
  std::string scenario;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t replicate = 0;
  std::string estimator;  // label, e.g. adjusted[U+R]
  std::string kind;       // naive | oracle-adjusted | substitute-adjusted
  std::string family;     // factor-model family for substitute rows
  std::size_t k = 0;
  std::string estimand;
  double point = 0.0;
  double se = 0.0;
  double truth = 0.0;
  double bias = 0.0;
  std::string status = "ok";  // ok | degenerate | error
  double condition_number = 0.0;
  std::string independence;  // pass | fail for substitute rows
  std::string overlap;       // pass | fail for substitute rows
  std::string note;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
};

struct RunInfo {
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_clock_seconds = 0.0;
};

/// Replicate seed for a cell: mix64(base, fnv1a64("scenario|n|m"), replicate).
std::uint64_t replicate_seed(std::uint64_t base, const std::string& scenario, std::size_t n, std::size_t m,
                             std::size_t replicate);

/// Runs every (scenario, n, m, replicate) job on `jobs` threads (0 = hardware
/// concurrency). Row order does not depend on the thread count.
ResultsTable run_experiment(const ExperimentConfig& config, std::size_t jobs = 1, RunInfo* info = nullptr);

/// Every row of one (scenario, n, m, replicate) job.
std::vector<ResultRow> run_replicate(const ExperimentConfig& config, const std::string& scenario, std::size_t n,
                                     std::optional<std::size_t> m, std::size_t replicate);

// ---- persistence ----------------------------------------------------------

std::string to_csv(const ResultsTable& table);
nlohmann::json to_json(const ResultsTable& table);
ResultsTable parse_csv(const std::string& text);
ResultsTable load_csv_file(const std::string& path);
/// Writes the table (csv or json per config.format) and `<path>.meta.json`.
void write_results(const ResultsTable& table, const ExperimentConfig& config, const RunInfo& info,
                   const std::string& path);

// ---- summaries ------------------------------------------------------------

struct SummaryRow {
  std::string scenario;
  std::size_t n = 0;
  std::size_t m = 0;
  std::string estimator;
  std::string estimand;
  std::size_t replicates = 0;
  std::size_t degenerate = 0;
  std::size_t errors = 0;
  double truth = 0.0;
  double mean_bias = 0.0;
  double mc_se = 0.0;  // NaN with fewer than two usable rows
  double mean_abs_bias = 0.0;
  std::string verdict;   // unbiased | biased | degenerate | inconclusive | n/a | error
  std::string expected;  // scenario expectation
  std::string outcome;   // PASS | FAIL | n.a.
};

struct Summary {
  std::vector<SummaryRow> rows;
  bool all_pass() const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// Groups by (scenario, n, m, estimator, estimand). Verdict: degenerate when at
/// least half the rows are; unbiased when |mean bias| <= 3 MC SE; biased when
/// > 5 MC SE; inconclusive in between.
Summary summarize(const ResultsTable& table);

}  // namespace deconlab::harness
