#include "deconlab/errors.hpp"
#include "deconlab/estimators.hpp"
#include "deconlab/harness.hpp"
#include "deconlab/linear_model.hpp"
#include "deconlab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace deconlab::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Kind { naive, adjusted, substitute };

struct EstimatorPlan {
  std::string label;
  Kind kind = Kind::naive;
  std::vector<std::string> covariates;
  factor::FactorModelSpec model;
};

std::vector<std::string> split_plus(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find('+', start);
    const std::string part = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (part.empty()) throw ConfigError("empty covariate name in estimator label");
    out.push_back(part);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::string join_plus(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "+" : "") + names[i];
  return out;
}

std::string substitute_label(const factor::FactorModelSpec& spec) {
  return "substitute[" + std::string(factor::to_string(spec.family)) + ":" + std::to_string(spec.k) + "]";
}

EstimatorPlan parse_label(const std::string& label, const ExperimentConfig& config) {
  EstimatorPlan p;
  p.label = label;
  if (label == "naive") return p;
  const auto open = label.find('[');
  if (open == std::string::npos || label.back() != ']') {
    throw ConfigError("unknown estimator '" + label + "' (expected naive, oracle[..], adjusted[..] or substitute[family:k])");
  }
  const std::string head = label.substr(0, open);
  const std::string body = label.substr(open + 1, label.size() - open - 2);
  if (head == "oracle" || head == "adjusted") {
    p.kind = Kind::adjusted;
    p.covariates = split_plus(body);
    return p;
  }
  if (head == "substitute") {
    p.kind = Kind::substitute;
    const auto colon = body.find(':');
    if (colon == std::string::npos) throw ConfigError("substitute label '" + label + "' must read substitute[family:k]");
    p.model.family = factor::family_from_string(body.substr(0, colon));
    try {
      p.model.k = std::stoul(body.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("substitute label '" + label + "' has a bad k");
    }
    for (const auto& spec : config.factor_models) {
      if (spec.family == p.model.family && spec.k == p.model.k) p.model = spec;
    }
    return p;
  }
  throw ConfigError("unknown estimator '" + label + "'");
}

std::vector<EstimatorPlan> plan_estimators(const ExperimentConfig& config, const scenarios::Scenario& s) {
  std::vector<std::string> labels;
  auto add = [&](const std::string& l) {
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  };
  auto add_substitutes = [&] {
    if (!config.factor_models.empty()) {
      for (const auto& spec : config.factor_models) add(substitute_label(spec));
      return;
    }
    for (const auto& e : s.estimators) {
      if (e.label.rfind("substitute[", 0) == 0) add(e.label);
    }
  };
  for (const auto& item : config.estimators) {
    if (item == "all") {
      for (const auto& e : s.estimators) {
        if (e.label.rfind("substitute[", 0) != 0) add(e.label);
      }
      add_substitutes();
    } else if (item == "oracle") {
      add("oracle[" + join_plus(s.oracle_set) + "]");
    } else if (item == "substitute") {
      add_substitutes();
    } else {
      add(item);
    }
  }
  std::vector<EstimatorPlan> plans;
  for (const auto& l : labels) {
    EstimatorPlan p = parse_label(l, config);
    for (const auto& name : p.covariates) {
      const auto idx = s.scm.graph().find(name);
      if (!idx) throw ConfigError("estimator '" + l + "' names '" + name + "', which is not a node of scenario " + s.id);
      if (s.scm.graph().node(*idx).role == scm::Role::outcome) {
        throw ConfigError("estimator '" + l + "' adjusts for the outcome");
      }
    }
    plans.push_back(std::move(p));
  }
  return plans;
}

scenarios::Params params_for(const ExperimentConfig& config, std::optional<std::size_t> m) {
  scenarios::Params p;
  p.m = m;
  p.dashed = config.dashed;
  p.overrides = config.overrides;
  return p;
}

struct Cell {
  std::string scenario;
  std::size_t n = 0;
  std::optional<std::size_t> m;
};

std::vector<Cell> cells_of(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (const auto& id : config.scenarios) {
    const auto& entry = scenarios::catalog_entry(id);
    std::vector<std::optional<std::size_t>> ms;
    if (config.m.empty() || !entry.default_m) {
      ms.push_back(std::nullopt);
    } else {
      for (std::size_t m : config.m) ms.push_back(m);
    }
    for (std::size_t n : config.n) {
      for (const auto& m : ms) cells.push_back({id, n, m});
    }
  }
  return cells;
}

std::string fmt_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", p);
  return buf;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t base, const std::string& scenario, std::size_t n, std::size_t m,
                             std::size_t replicate) {
  const std::string key = scenario + "|" + std::to_string(n) + "|" + std::to_string(m);
  return mix64(base, fnv1a64(key), replicate);
}

std::vector<ResultRow> run_replicate(const ExperimentConfig& config, const std::string& id, std::size_t n,
                                     std::optional<std::size_t> m, std::size_t replicate) {
  const scenarios::Scenario s = scenarios::build_scenario(id, params_for(config, m));
  const std::vector<EstimatorPlan> plans = plan_estimators(config, s);
  const std::uint64_t seed = replicate_seed(config.seed, s.id, n, s.m, replicate);

  const scm::FullData full = scm::sample_full_data(s.scm.with_seed(seed), n, {}, 0);
  const scm::Dataset data = scm::mask_observed(full);
  const std::string estimand = s.estimand.label();

  std::vector<ResultRow> rows;
  for (const auto& plan : plans) {
    ResultRow row;
    row.scenario = s.id;
    row.n = n;
    row.m = s.m;
    row.replicate = replicate;
    row.estimator = plan.label;
    row.estimand = estimand;
    row.truth = s.truth;
    row.point = row.se = row.bias = row.condition_number = kNaN;

    estimate::EstimatorOptions opt;
    opt.bootstrap = config.bootstrap;
    opt.seed = mix64(seed, 2, fnv1a64(plan.label));
    opt.interactions = config.interactions;
    try {
      estimate::EffectEstimate est;
      switch (plan.kind) {
        case Kind::naive:
          row.kind = estimate::to_string(estimate::EstimatorKind::naive);
          est = estimate::estimate_naive(data, s.estimand, opt);
          break;
        case Kind::adjusted:
          row.kind = estimate::to_string(estimate::EstimatorKind::oracle_adjusted);
          est = estimate::estimate_adjusted(data, estimate::full_covariates(full, plan.covariates), s.estimand, opt);
          break;
        case Kind::substitute: {
          row.kind = estimate::to_string(estimate::EstimatorKind::substitute_adjusted);
          row.family = std::string(factor::to_string(plan.model.family));
          row.k = plan.model.k;
          factor::FactorModelSpec spec = plan.model;
          spec.init_seed = mix64(seed, 1, plan.model.init_seed);
          const factor::SubstituteConfounder sub = factor::fit(data.causes, spec);
          std::string note;
          if (data.m >= 2 && n > static_cast<std::size_t>(sub.zhat.cols()) + 3) {
            const auto ind = factor::independence_check(data.causes, sub.zhat, config.alpha);
            row.independence = ind.renders_independent ? "pass" : "fail";
            double min_p = 1.0;
            for (const auto& pr : ind.pairs) min_p = std::min(min_p, pr.p_value);
            note = "min pair p " + fmt_p(min_p);
          }
          const auto ov = estimate::overlap_diagnostic(data, sub, s.estimand.subset());
          row.overlap = ov.pass ? "pass" : "fail";
          // How much of each observed auxiliary column the substitute carries.
          for (std::size_t j = 0; j < data.extra_names.size(); ++j) {
            double best = 0.0;
            for (Eigen::Index c = 0; c < sub.zhat.cols(); ++c) {
              best = std::max(best, std::abs(stats::correlation(sub.zhat.col(c), data.extra.col(j))));
            }
            note += (note.empty() ? "" : "; ") + ("max |corr(zhat, " + data.extra_names[j] + ")| " + fmt_p(best));
          }
          for (const auto& w : sub.diagnostics.warnings) note += (note.empty() ? "" : "; ") + w;
          row.note = note;
          est = estimate::estimate_substitute(data, sub, s.estimand, opt);
          break;
        }
      }
      estimate::set_truth(est, s.truth);
      row.point = est.point;
      row.se = est.se;
      row.bias = est.bias;
      row.condition_number = est.condition_number;
    } catch (const estimate::CollinearityError& e) {
      row.status = "degenerate";
      row.condition_number = e.report().condition_number;
      row.note = row.note.empty() ? e.what() : row.note + "; " + e.what();
    } catch (const DegenerateInputError& e) {
      row.status = "degenerate";
      row.note = e.what();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      row.status = "error";
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ResultsTable run_experiment(const ExperimentConfig& config, std::size_t jobs, RunInfo* info) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Cell> cells = cells_of(config);
  // Validate every cell up front so that configuration errors surface before any work.
  for (const auto& c : cells) plan_estimators(config, scenarios::build_scenario(c.scenario, params_for(config, c.m)));

  struct Job {
    std::size_t cell;
    std::size_t replicate;
  };
  std::vector<Job> work;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t r = 0; r < config.replicates; ++r) work.push_back({c, r});
  }
  std::vector<std::vector<ResultRow>> slots(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const Cell& c = cells[work[i].cell];
      try {
        slots[i] = run_replicate(config, c.scenario, c.n, c.m, work[i].replicate);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, std::max<std::size_t>(work.size(), 1));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ResultsTable table;
  for (auto& s : slots) {
    for (auto& row : s) table.rows.push_back(std::move(row));
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scenario, a.n, a.m, a.replicate) < std::tie(b.scenario, b.n, b.m, b.replicate);
  });
  if (info) {
    info->config_hash = config_hash(config);
    info->seed = config.seed;
    info->wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return table;
}

}  // namespace deconlab::harness
