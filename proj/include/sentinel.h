/* sentinel.h — C API for the wind-farm condition monitoring library.
 *
 * All functions that can fail return a sentinel_status; on failure a
 * human-readable message is available from sentinel_last_error() until the
 * next call on the same thread.  Strings returned through char** out
 * parameters are heap-allocated and must be released with
 * sentinel_string_free().
 */
#ifndef SENTINEL_H
#define SENTINEL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sentinel_status {
    SENTINEL_OK = 0,
    SENTINEL_ERR_USAGE = 1,   /* bad arguments / malformed request */
    SENTINEL_ERR_DATA = 2,    /* unreadable, malformed, or inconsistent inputs */
    SENTINEL_ERR_INTERNAL = 3 /* invariant violation inside the library */
} sentinel_status;

/* Library version string, e.g. "1.0.0".  Never NULL. */
const char* sentinel_version(void);

/* Message for the most recent failure on this thread ("" when none). */
const char* sentinel_last_error(void);

/* Releases a string returned through a char** out parameter. */
void sentinel_string_free(char* text);

/* ---- Farm configuration ------------------------------------------------ */

typedef struct sentinel_config sentinel_config;

sentinel_status sentinel_config_load(const char* path, sentinel_config** out);
void sentinel_config_free(sentinel_config* config);
const char* sentinel_config_farm_id(const sentinel_config* config);
size_t sentinel_config_turbine_count(const sentinel_config* config);

/* ---- Commands ----------------------------------------------------------
 * These mirror the CLI verbs.  `data_paths` / `model_paths` are arrays of
 * concrete file paths (no glob expansion happens inside the library).
 * `seed_override` is an optional decimal string; pass NULL to keep the seed
 * from the configuration or scenario.  On success `*summary` receives a
 * human-readable report of what was produced.
 */

sentinel_status sentinel_train(const char* config_path,
                               const char* const* data_paths, size_t data_count,
                               const char* out_dir,
                               const char* seed_override,
                               char** summary);

sentinel_status sentinel_monitor(const char* const* model_paths, size_t model_count,
                                 const char* const* data_paths, size_t data_count,
                                 const char* out_dir,
                                 char** summary);

sentinel_status sentinel_simulate(const char* config_path,
                                  const char* scenario_path,
                                  const char* out_dir,
                                  const char* seed_override,
                                  char** summary);

/* `machine_format` nonzero selects JSON output, zero plain text. */
sentinel_status sentinel_evaluate(const char* warnings_path,
                                  const char* labels_path,
                                  int machine_format,
                                  char** report);

/* ---- Trained models ---------------------------------------------------- */

typedef struct sentinel_model sentinel_model;

sentinel_status sentinel_model_load(const char* path, sentinel_model** out);
void sentinel_model_free(sentinel_model* model);
const char* sentinel_model_turbine(const sentinel_model* model);
const char* sentinel_model_component(const sentinel_model* model);
size_t sentinel_model_tag_count(const sentinel_model* model);
/* NULL when index is out of range. */
const char* sentinel_model_tag_name(const sentinel_model* model, size_t index);

/* Scores one raw sample.  `tag_values` holds one reading per model tag (in
 * tag order, length `count` == tag_count); `ambient` is the concurrent
 * ambient temperature used for seasonal adjustment.  On success writes the
 * control-chart statistic to *t2 and the region (1 normal / 2 alert /
 * 3 critical) to *region.
 */
sentinel_status sentinel_model_score(const sentinel_model* model,
                                     const double* tag_values, size_t count,
                                     double ambient,
                                     double* t2, int* region);

#ifdef __cplusplus
}
#endif

#endif /* SENTINEL_H */
