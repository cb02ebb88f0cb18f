#include "deconlab/deconlab.h"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

TEST_CASE("version and catalog") {
  CHECK(std::string(dl_version()) == "0.1.0");
  CHECK(dl_scenario_count() == 7);
  CHECK(std::string(dl_scenario_id(0)) == "a");
  CHECK(dl_scenario_id(7) == nullptr);
  CHECK(std::strlen(dl_scenario_description(6)) > 0);
}

TEST_CASE("null arguments are reported") {
  CHECK(dl_scm_load_json(nullptr, nullptr) == DL_E_ARGUMENT);
  CHECK(std::string(dl_last_error()) == "null argument");
  CHECK(dl_results_row_count(nullptr) == 0);
  dl_scm_free(nullptr);
  dl_results_free(nullptr);
}

TEST_CASE("scenario build, serialize and reload") {
  dl_scm* scm = nullptr;
  REQUIRE(dl_scenario_build("b", R"({"m": 3, "dashed": true})", &scm) == DL_OK);
  char* text = nullptr;
  REQUIRE(dl_scm_to_json(scm, &text) == DL_OK);
  dl_scm* again = nullptr;
  REQUIRE(dl_scm_load_json(text, &again) == DL_OK);
  char* text2 = nullptr;
  REQUIRE(dl_scm_to_json(again, &text2) == DL_OK);
  CHECK(std::string(text) == std::string(text2));
  dl_string_free(text);
  dl_string_free(text2);
  dl_scm_free(scm);
  dl_scm_free(again);

  CHECK(dl_scenario_build("z", nullptr, &scm) == DL_E_CONFIG);
  CHECK(std::string(dl_last_error()).find("unknown scenario") != std::string::npos);
  CHECK(dl_scenario_build("b", R"({"mm": 3})", &scm) == DL_E_CONFIG);
  CHECK(dl_scm_load_json("{", &scm) == DL_E_CONFIG);
}

TEST_CASE("graph check") {
  dl_scm* scm = nullptr;
  REQUIRE(dl_scenario_build("d", nullptr, &scm) == DL_OK);
  dl_graph_report* ok = nullptr;
  REQUIRE(dl_check_graph(scm, "A_1,A_2,A_3,A_4,A_5", "Y", "", &ok) == DL_OK);
  CHECK(dl_graph_report_valid(ok) == 1);
  dl_graph_report* bad = nullptr;
  REQUIRE(dl_check_graph(scm, "A_1, A_2, A_3, A_4, A_5", "Y", "M", &bad) == DL_OK);
  CHECK(dl_graph_report_valid(bad) == 0);
  CHECK(std::string(dl_graph_report_text(bad)).find("INVALID") != std::string::npos);
  dl_graph_report* unknown = nullptr;
  CHECK(dl_check_graph(scm, "A_9", "Y", "", &unknown) == DL_E_CONFIG);
  dl_graph_report_free(ok);
  dl_graph_report_free(bad);
  dl_scm_free(scm);
}

TEST_CASE("experiment, csv and summary") {
  const char* config = R"({"scenario": "d", "n": 300, "replicates": 4, "bootstrap": 0, "seed": 3})";
  dl_results* a = nullptr;
  dl_results* b = nullptr;
  REQUIRE(dl_experiment_run(config, nullptr, 1, &a) == DL_OK);
  const uint64_t seed = 3;
  REQUIRE(dl_experiment_run(config, &seed, 2, &b) == DL_OK);
  CHECK(dl_results_row_count(a) == 16);
  char* ca = nullptr;
  char* cb = nullptr;
  REQUIRE(dl_results_csv(a, &ca) == DL_OK);
  REQUIRE(dl_results_csv(b, &cb) == DL_OK);
  CHECK(std::string(ca) == std::string(cb));

  const std::string path = "capi_test_results.csv";
  REQUIRE(dl_results_write(a, path.c_str()) == DL_OK);
  dl_summary* s = nullptr;
  REQUIRE(dl_summarize_file(path.c_str(), &s) == DL_OK);
  CHECK(std::string(dl_summary_text(s)).find("scenario d") != std::string::npos);
  CHECK(std::string(dl_summary_json(s)).find("\"groups\"") != std::string::npos);
  dl_summary_free(s);
  std::remove(path.c_str());
  std::remove((path + ".meta.json").c_str());

  dl_string_free(ca);
  dl_string_free(cb);
  dl_results_free(a);
  dl_results_free(b);

  dl_results* bad = nullptr;
  CHECK(dl_experiment_run(R"({"scenario": "d", "n": 300})", nullptr, 1, &bad) == DL_E_CONFIG);
  CHECK(std::string(dl_last_error()) == "config.replicates: is required");
  dl_summary* missing = nullptr;
  CHECK(dl_summarize_file("/nonexistent/results.csv", &missing) == DL_E_CONFIG);
}
