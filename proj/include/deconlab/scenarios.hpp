#pragma once

// Pre-registered simulation scenarios a-g: an SCM, the estimand, its exact
// truth, and the estimators run on it with their expected verdicts.

#include "deconlab/estimators.hpp"
#include "deconlab/factor_models.hpp"
#include "deconlab/scm.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deconlab::scenarios {

enum class Verdict { unbiased, biased, degenerate, unchecked };

std::string to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view text);

/// Structural knobs plus mechanism overrides. Override keys:
///   "w:P->C"  weight of the existing edge P -> C
///   "sd:N"    noise sd of the linear-gaussian node N
///   "b:N"     intercept of the linear-gaussian node N
struct Params {
  std::optional<std::size_t> m;  // number of causes, for scenarios that have the knob
  bool dashed = false;           // optional latent edge in scenarios b and c
  std::map<std::string, double> overrides;
};

struct EstimatorEntry {
  std::string label;  // naive | oracle[U] | adjusted[U+R] | substitute[ppca:1]
  Verdict expected = Verdict::unchecked;
};

struct Scenario {
  std::string id;
  std::string description;
  scm::Scm scm;
  std::size_t m = 0;
  estimate::Estimand estimand;
  double truth = 0.0;
  std::vector<std::string> oracle_set;
  std::vector<EstimatorEntry> estimators;
};

struct CatalogEntry {
  std::string id;
  std::string description;
  std::optional<std::size_t> default_m;  // empty when the number of causes is fixed
  std::size_t fixed_m = 0;
  bool has_dashed = false;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(std::string_view id);

/// Throws ConfigError for an unknown id, an unsupported knob, or an override
/// that names a missing edge or a non-linear-gaussian node.
Scenario build_scenario(std::string_view id, const Params& params = {});

/// Expected verdict for an estimator label on a scenario; unchecked when the
/// scenario makes no claim about it.
Verdict expected_verdict(std::string_view id, std::string_view estimator_label);

}  // namespace deconlab::scenarios
