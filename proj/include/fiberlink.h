/*
 * fiberlink C API: simulation and analysis of hybrid optical-fiber
 * frequency-transfer links through opaque handles and status codes.
 *
 * Every function returns FL_OK on success. On failure, fl_last_error()
 * returns a thread-local description of what went wrong. Handles are freed
 * with their matching fl_*_free function; freeing NULL is a no-op.
 */
#ifndef FIBERLINK_H
#define FIBERLINK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define FL_VERSION_STRING "1.0.0"

typedef enum fl_status {
    FL_OK = 0,
    FL_ERR_INVALID = 1,  /* invalid argument or precondition violation */
    FL_ERR_CONFIG = 2,   /* configuration / schema violation */
    FL_ERR_DATA = 3,     /* malformed or inconsistent data */
    FL_ERR_IO = 4,       /* filesystem failure */
    FL_ERR_INTERNAL = 5
} fl_status;

typedef enum fl_counter_kind { FL_COUNTER_PI = 0, FL_COUNTER_LAMBDA = 1 } fl_counter_kind;

typedef enum fl_estimator {
    FL_ESTIMATOR_ADEV = 0,
    FL_ESTIMATOR_OADEV = 1,
    FL_ESTIMATOR_MDEV = 2
} fl_estimator;

typedef struct fl_config fl_config;           /* campaign configuration */
typedef struct fl_observables fl_observables; /* raw + derived beat-note phase */
typedef struct fl_series fl_series;           /* counted fractional frequency */
typedef struct fl_curve fl_curve;             /* stability curve */

const char* fl_version(void);

/* Thread-local message for the most recent failure in this thread. */
const char* fl_last_error(void);

/* ------------------------------------------------------------------ */
/* Configuration                                                       */
/* ------------------------------------------------------------------ */

fl_status fl_config_default(fl_config** out);
fl_status fl_config_load(const char* path, fl_config** out);
fl_status fl_config_parse(const char* json_text, fl_config** out);
void fl_config_free(fl_config* config);

/* Canonical JSON of the resolved config; free with fl_string_free. */
fl_status fl_config_to_json(const fl_config* config, char** out_json);

/* 16 hex digits + NUL; buffer must hold at least 17 bytes. */
fl_status fl_config_hash(const fl_config* config, char* buf, size_t buflen);

/* ------------------------------------------------------------------ */
/* Simulation and observables                                          */
/* ------------------------------------------------------------------ */

/* Simulates the configured link for its configured duration and rate. */
fl_status fl_simulate(const fl_config* config, uint64_t seed, fl_observables** out);
void fl_observables_free(fl_observables* set);

/* Fills the derived combinations (TWU1..3, TWB1..3, TWNF). */
fl_status fl_observables_combine(fl_observables* set);

/* Channel names: ANC RT OWB OWF and, after combining, TWU1..TWNF. */
fl_status fl_observables_count(const fl_observables* set, const char* channel,
                               fl_counter_kind kind, double gate_s, fl_series** out);

/* ------------------------------------------------------------------ */
/* Counted series                                                      */
/* ------------------------------------------------------------------ */

size_t fl_series_length(const fl_series* series);
double fl_series_gate(const fl_series* series);

/* Copies up to cap samples; gapped samples read as NaN. */
fl_status fl_series_values(const fl_series* series, double* out, size_t cap);
fl_status fl_series_validity(const fl_series* series, uint8_t* out, size_t cap);
void fl_series_free(fl_series* series);

/* ------------------------------------------------------------------ */
/* Statistics                                                          */
/* ------------------------------------------------------------------ */

/* Octave-spaced stability curve of the chosen estimator. */
fl_status fl_series_stability(const fl_series* series, fl_estimator estimator, fl_curve** out);
size_t fl_curve_length(const fl_curve* curve);
fl_status fl_curve_point(const fl_curve* curve, size_t index, double* tau_s, double* dev,
                         double* ci_1sigma);
void fl_curve_free(fl_curve* curve);

/* Mean offset with its statistical uncertainty (the larger of OADEV and
 * MDEV at tau_avg). consistent_with_zero is 1 when |mean| <= uncertainty.
 * rendered (optional, may be NULL) receives a "3.1(+-3.9)x10^-20" style
 * string when cap allows. */
fl_status fl_series_reciprocity(const fl_series* series, double tau_avg_s, double* mean,
                                double* uncertainty, int* consistent_with_zero, char* rendered,
                                size_t rendered_cap);

/* ------------------------------------------------------------------ */
/* Campaign verbs (what the CLI calls)                                 */
/* ------------------------------------------------------------------ */

/* Writes Pi and Lambda counter files plus a provenance sidecar per seed.
 * seed_override may be NULL to run every configured seed. */
fl_status fl_run_simulate(const char* config_path, const char* out_dir,
                          const uint64_t* seed_override);

/* inputs: one counter file per counter kind. analyses may be NULL to run
 * all of: stability psd accuracy reciprocity correlation ledger.
 * tau_avg_override and config_path may be NULL. */
fl_status fl_run_analyze(const char* const* inputs, size_t n_inputs,
                         const char* const* analyses, size_t n_analyses, const char* out_dir,
                         const double* tau_avg_override, const char* config_path,
                         double deslip_sigma);

/* Human-readable summary of an analysis directory; free with fl_string_free. */
fl_status fl_render_report(const char* analysis_dir, char** out_text);

void fl_string_free(char* text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FIBERLINK_H */
