#ifndef KNOTMORSE_H
#define KNOTMORSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(KNOTMORSE_BUILDING_LIBRARY)
#define KM_API __attribute__((visibility("default")))
#else
#define KM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; on failure a message is
   available from km_last_error() on the calling thread. */
typedef enum km_status {
  KM_OK = 0,
  KM_ERR_SYNTAX = 1,
  KM_ERR_UNKNOWN_IDENTIFIER = 2,
  KM_ERR_OPEN_CURVE = 3,
  KM_ERR_SINGULAR_CURVE = 4,
  KM_ERR_INVALID_ARGUMENT = 5,
  KM_ERR_TOO_CLOSE_TO_KNOT = 6,
  KM_ERR_DEGENERATE_CRITICAL_POINT = 7,
  KM_ERR_NO_CRITICAL_POINTS = 8,
  KM_ERR_BOUNDARY_CLIPPING = 9,
  KM_ERR_NON_MANIFOLD = 10,
  KM_ERR_TOPOLOGY = 11,
  KM_ERR_CLUSTERS_TOO_CLOSE = 12,
  KM_ERR_UNSTABLE_GENUS = 13,
  KM_ERR_LEVEL_NOT_REGULAR = 14,
  KM_ERR_IO = 15,
  KM_ERR_CONFIG = 16,
  KM_ERR_INTERNAL = 100
} km_status;

typedef struct km_curve km_curve;
typedef struct km_field km_field;
typedef struct km_config km_config;

KM_API const char* km_version(void);
KM_API const char* km_status_name(km_status status);
/* Message of the last failed call on this thread; "" if none. */
KM_API const char* km_last_error(void);
/* Frees strings returned through char** out-parameters. */
KM_API void km_string_free(char* s);

/* Curves. */
KM_API km_status km_curve_parse(const char* source, km_curve** out);
KM_API km_status km_curve_builtin(const char* name, const double* params, size_t n_params,
                                  km_curve** out);
KM_API km_status km_curve_perturb(const km_curve* curve, double amplitude, uint64_t seed,
                                  km_curve** out);
/* Any output pointer may be NULL. t is wrapped into [0, 2pi). */
KM_API km_status km_curve_eval(const km_curve* curve, double t, double point[3],
                               double velocity[3], double* speed);
KM_API km_status km_curve_to_string(const km_curve* curve, char** out);
KM_API void km_curve_free(km_curve* curve);

/* Potential field of a curve. Non-positive arguments select the defaults
   (16 panels, 16 nodes per panel, derived exclusion radius). */
KM_API km_status km_field_create(const km_curve* curve, int panels, int nodes_per_panel,
                                 double min_distance, km_field** out);
KM_API km_status km_field_potential(const km_field* field, const double x[3], double* out);
KM_API km_status km_field_gradient(const km_field* field, const double x[3], double out[3]);
/* Row-major 3x3. */
KM_API km_status km_field_hessian(const km_field* field, const double x[3], double out[9]);
KM_API km_status km_field_knot_length(const km_field* field, double* out);
KM_API void km_field_free(km_field* field);

/* Run configuration (TOML). */
KM_API km_status km_config_load(const char* path, km_config** out);
KM_API km_status km_config_parse(const char* text, km_config** out);
KM_API km_status km_config_set_threads(km_config* config, unsigned threads);
KM_API km_status km_config_set_output_dir(km_config* config, const char* dir);
KM_API km_status km_config_set_write_meshes(km_config* config, int enabled);
KM_API km_status km_config_to_toml(const km_config* config, char** out);
KM_API void km_config_free(km_config* config);

/* Full pipeline; writes the report (and meshes) under the output directory.
   *all_passed is 1 iff every verification check passed. report_json and
   report_path may be NULL. */
KM_API km_status km_run_analyze(const km_config* config, char** report_json, char** report_path,
                                int* all_passed);
/* Critical points as a text table and as JSON; either output may be NULL. */
KM_API km_status km_run_critical(const km_config* config, char** table, char** json);
/* Extracts each level; writes OBJ files when meshes are enabled. */
KM_API km_status km_run_surfaces(const km_config* config, const double* levels, size_t n_levels,
                                 char** summary, char** json);
/* Configuration whose knot is the perturbed curve. */
KM_API km_status km_run_perturb(const km_config* config, double amplitude, uint64_t seed,
                                km_config** out);

#ifdef __cplusplus
}
#endif

#endif
