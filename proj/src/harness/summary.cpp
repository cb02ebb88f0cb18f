#include "deconlab/errors.hpp"
#include "deconlab/harness.hpp"
#include "deconlab/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

namespace deconlab::harness {

using nlohmann::json;

namespace {

std::string expected_for(const std::string& scenario, const std::string& estimator) {
  try {
    return scenarios::to_string(scenarios::expected_verdict(scenario, estimator));
  } catch (const ConfigError&) {
    return "unchecked";
  }
}

std::string num(double v, const char* format = "%.4g") {
  if (std::isnan(v)) return "n/a";
  char buf[40];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

Summary summarize(const ResultsTable& table) {
  if (table.rows.empty()) throw ConfigError("cannot summarize an empty results table");
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::string, std::string>;
  std::map<Key, std::size_t> first_seen;
  std::vector<Key> keys;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : table.rows) {
    const Key key{r.scenario, r.n, r.m, r.estimator, r.estimand};
    if (!first_seen.count(key)) {
      first_seen[key] = keys.size();
      keys.push_back(key);
    }
    groups[key].push_back(&r);
  }
  std::stable_sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a)) <
           std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b));
  });

  Summary summary;
  for (const auto& key : keys) {
    const auto& rows = groups[key];
    SummaryRow s;
    std::tie(s.scenario, s.n, s.m, s.estimator, s.estimand) = key;
    s.replicates = rows.size();
    s.truth = rows.front()->truth;
    std::vector<double> bias;
    double abs_sum = 0.0;
    for (const auto* r : rows) {
      if (r->status == "degenerate") ++s.degenerate;
      else if (r->status == "error" || !std::isfinite(r->bias)) ++s.errors;
      else {
        bias.push_back(r->bias);
        abs_sum += std::abs(r->bias);
      }
    }
    std::tie(s.mean_bias, s.mc_se) = stats::mean_and_se(bias);
    s.mean_abs_bias = bias.empty() ? std::nan("") : abs_sum / static_cast<double>(bias.size());
    if (2 * s.degenerate >= s.replicates) {
      s.verdict = "degenerate";
    } else if (bias.empty()) {
      s.verdict = "error";
    } else if (std::isnan(s.mc_se)) {
      s.verdict = "n/a";
    } else if (std::abs(s.mean_bias) <= 3.0 * s.mc_se) {
      s.verdict = "unbiased";
    } else if (std::abs(s.mean_bias) > 5.0 * s.mc_se) {
      s.verdict = "biased";
    } else {
      s.verdict = "inconclusive";
    }
    s.expected = expected_for(s.scenario, s.estimator);
    if (s.expected == "unchecked" || s.verdict == "n/a") {
      s.outcome = "n.a.";
    } else {
      s.outcome = s.verdict == s.expected ? "PASS" : "FAIL";
    }
    summary.rows.push_back(std::move(s));
  }
  return summary;
}

bool Summary::all_pass() const {
  return std::none_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.outcome == "FAIL"; });
}

std::string Summary::to_text() const {
  std::string out;
  std::string current;
  char line[512];
  for (const auto& r : rows) {
    if (r.scenario != current) {
      current = r.scenario;
      out += (out.empty() ? "" : "\n");
      out += "scenario " + r.scenario + "\n";
      std::snprintf(line, sizeof line, "  %-8s %-4s %-24s %5s %12s %12s %12s %12s  %-12s %-12s %s\n", "n", "m",
                    "estimator", "reps", "truth", "mean bias", "MC SE", "mean |bias|", "verdict", "expected",
                    "outcome");
      out += line;
    }
    std::snprintf(line, sizeof line, "  %-8zu %-4zu %-24s %5zu %12s %12s %12s %12s  %-12s %-12s %s\n", r.n, r.m,
                  r.estimator.c_str(), r.replicates, num(r.truth).c_str(), num(r.mean_bias).c_str(),
                  num(r.mc_se).c_str(), num(r.mean_abs_bias).c_str(), r.verdict.c_str(), r.expected.c_str(),
                  r.outcome.c_str());
    out += line;
    if (r.degenerate || r.errors) {
      std::snprintf(line, sizeof line, "           (%zu degenerate, %zu error rows)\n", r.degenerate, r.errors);
      out += line;
    }
  }
  return out;
}

json Summary::to_json() const {
  auto finite = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  json groups = json::array();
  for (const auto& r : rows) {
    groups.push_back({{"scenario", r.scenario},
                      {"n", r.n},
                      {"m", r.m},
                      {"estimator", r.estimator},
                      {"estimand", r.estimand},
                      {"replicates", r.replicates},
                      {"degenerate", r.degenerate},
                      {"errors", r.errors},
                      {"truth", finite(r.truth)},
                      {"mean_bias", finite(r.mean_bias)},
                      {"mc_se", finite(r.mc_se)},
                      {"mean_abs_bias", finite(r.mean_abs_bias)},
                      {"verdict", r.verdict},
                      {"expected", r.expected},
                      {"outcome", r.outcome}});
  }
  return {{"groups", groups}, {"all_pass", all_pass()}};
}

}  // namespace deconlab::harness
