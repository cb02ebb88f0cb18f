#ifndef DECONLAB_DECONLAB_H
#define DECONLAB_DECONLAB_H

/* C interface to the deconlab simulation library.
 *
 * Every fallible call returns a dl_status. On failure the message is
 * available from dl_last_error() on the calling thread until its next call.
 * Strings returned through char** are owned by the caller and released with
 * dl_string_free(); const char* results are owned by the handle they came
 * from. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DECONLAB_BUILDING)
#    define DL_API __declspec(dllexport)
#  else
#    define DL_API __declspec(dllimport)
#  endif
#else
#  define DL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dl_status {
  DL_OK = 0,
  DL_E_CONFIG = 1,   /* malformed input or configuration */
  DL_E_RUNTIME = 2,  /* numerical or I/O failure */
  DL_E_VERDICT = 3,  /* a check ran and failed */
  DL_E_ARGUMENT = 4  /* null handle or pointer */
} dl_status;

typedef struct dl_scm dl_scm;
typedef struct dl_graph_report dl_graph_report;
typedef struct dl_results dl_results;
typedef struct dl_summary dl_summary;

DL_API const char* dl_version(void);
DL_API const char* dl_last_error(void);
DL_API void dl_string_free(char* s);

/* ---- structural causal models ---- */

DL_API dl_status dl_scm_load_file(const char* path, dl_scm** out);
DL_API dl_status dl_scm_load_json(const char* text, dl_scm** out);
DL_API dl_status dl_scm_to_json(const dl_scm* scm, char** out);
DL_API void dl_scm_free(dl_scm* scm);

/* ---- scenario catalog ---- */

DL_API size_t dl_scenario_count(void);
/* NULL when i is out of range. */
DL_API const char* dl_scenario_id(size_t i);
DL_API const char* dl_scenario_description(size_t i);
/* params_json may be NULL or {"m": 5, "dashed": true, "overrides": {"w:U->Y": 2}}. */
DL_API dl_status dl_scenario_build(const char* id, const char* params_json, dl_scm** out);
/* Writes scenario_<id>.json for every scenario into dir (which must exist). */
DL_API dl_status dl_scenarios_export(const char* dir);

/* ---- graph checks ---- */

/* treatments and adjust are comma-separated node names; adjust may be empty. */
DL_API dl_status dl_check_graph(const dl_scm* scm, const char* treatments, const char* outcome, const char* adjust,
                                dl_graph_report** out);
DL_API int dl_graph_report_valid(const dl_graph_report* report);
DL_API const char* dl_graph_report_text(const dl_graph_report* report);
DL_API void dl_graph_report_free(dl_graph_report* report);

/* ---- experiments ---- */

/* seed_override may be NULL; jobs = 0 uses every hardware thread. */
DL_API dl_status dl_experiment_run(const char* config_json, const uint64_t* seed_override, size_t jobs,
                                   dl_results** out);
DL_API size_t dl_results_row_count(const dl_results* results);
/* The "output" entry of the configuration, or "" when absent. */
DL_API const char* dl_results_output_path(const dl_results* results);
DL_API dl_status dl_results_csv(const dl_results* results, char** out);
/* Writes the table and <path>.meta.json. */
DL_API dl_status dl_results_write(const dl_results* results, const char* path);
DL_API void dl_results_free(dl_results* results);

/* ---- summaries ---- */

DL_API dl_status dl_summarize_file(const char* csv_path, dl_summary** out);
DL_API const char* dl_summary_text(const dl_summary* summary);
DL_API const char* dl_summary_json(const dl_summary* summary);
DL_API int dl_summary_all_pass(const dl_summary* summary);
DL_API void dl_summary_free(dl_summary* summary);

#ifdef __cplusplus
}
#endif

#endif
