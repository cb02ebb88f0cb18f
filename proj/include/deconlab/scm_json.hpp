#pragma once

// SCM definition documents.
//
//   {
//     "nodes": [ {"name": "U", "role": "latent",
//                 "mechanism": {"form": "linear-gaussian",
//                               "weights": {}, "intercept": 0, "noise_sd": 1}}, ... ],
//     "edges": [ ["U", "A_1"], ... ],
//     "cause_order": ["A_1", ...],
//     "seed": 20190101
//   }
//
// Mechanism forms and their keys:
//   linear-gaussian        weights, intercept, noise_sd
//   bernoulli-logistic     weights, intercept
//   uniform                lo, hi
//   two-point              values [v0, v1], prob (= P(v1))
//   categorical-indicator  probs (k = length, value = category index)
//   table                  parents [..], rows [{given, values, probs}, ..]
// Every object rejects keys it does not know.

#include "deconlab/scm.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace deconlab::scm {

Scm scm_from_json(const nlohmann::json& doc);
nlohmann::json scm_to_json(const Scm& scm);

Scm parse_scm(const std::string& text);
/// Two-space indented document with a trailing newline.
std::string dump_scm(const Scm& scm);

Scm load_scm_file(const std::filesystem::path& path);

/// Rejects keys of `obj` outside `allowed`; `where` prefixes the message.
void require_known_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where);

}  // namespace deconlab::scm
