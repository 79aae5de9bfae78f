/* C interface to the aftxs library. All handles are opaque; every call that
 * can fail returns an aftxs_status and leaves a message retrievable with
 * aftxs_last_error() on the calling thread. Strings returned through char**
 * are owned by the caller and released with aftxs_string_free(). */
#ifndef AFTXS_AFTXS_H
#define AFTXS_AFTXS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(AFTXS_BUILDING)
#define AFTXS_API __declspec(dllexport)
#else
#define AFTXS_API __declspec(dllimport)
#endif
#else
#define AFTXS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aftxs_status {
  AFTXS_OK = 0,
  AFTXS_E_INVALID_ARGUMENT = 1,
  AFTXS_E_MODEL = 2,
  AFTXS_E_NUMERICAL = 3,
  AFTXS_E_NO_ROOT = 4,
  AFTXS_E_NO_SOLUTION = 5,
  AFTXS_E_DOMAIN = 6,
  AFTXS_E_IO = 7,
  AFTXS_E_INTERNAL = 99
} aftxs_status;

typedef enum aftxs_variant { AFTXS_KNOWN_H = 0, AFTXS_UNKNOWN_H_MEAN_ZERO = 1 } aftxs_variant;
typedef enum aftxs_sampler { AFTXS_SAMPLER_DIRECT = 0, AFTXS_SAMPLER_MECHANISTIC = 1 } aftxs_sampler;
typedef enum aftxs_estimator {
  AFTXS_PRELIM = 0,
  AFTXS_ONE_STEP_SPLIT = 1,
  AFTXS_ONE_STEP_PLUGIN = 2
} aftxs_estimator;
typedef enum aftxs_hazard_method { AFTXS_HAZARD_KERNEL = 0, AFTXS_HAZARD_SYMMETRIZED = 1 } aftxs_hazard_method;

typedef struct aftxs_spec aftxs_spec;
typedef struct aftxs_dataset aftxs_dataset;

AFTXS_API const char* aftxs_version(void);
/* Message of the last failed call on this thread ("" if none). */
AFTXS_API const char* aftxs_last_error(void);
AFTXS_API const char* aftxs_status_name(aftxs_status status);
AFTXS_API void aftxs_string_free(char* s);

/* Model specifications (JSON documents). */
AFTXS_API aftxs_status aftxs_spec_from_json(const char* json, aftxs_spec** out);
AFTXS_API aftxs_status aftxs_spec_read(const char* path, aftxs_spec** out);
AFTXS_API aftxs_status aftxs_spec_to_json(const aftxs_spec* spec, char** out);
AFTXS_API aftxs_status aftxs_spec_dim(const aftxs_spec* spec, size_t* k);
AFTXS_API aftxs_status aftxs_spec_variant(const aftxs_spec* spec, aftxs_variant* variant);
/* Writes the regularity report as JSON; *ok is 1 when every condition holds. */
AFTXS_API aftxs_status aftxs_spec_validate(const aftxs_spec* spec, int* ok, char** report_json);
AFTXS_API void aftxs_spec_free(aftxs_spec* spec);

/* Datasets. */
AFTXS_API aftxs_status aftxs_simulate(const aftxs_spec* spec, size_t n, uint64_t seed, aftxs_sampler sampler,
                                      aftxs_dataset** out);
/* z is row-major n x k. */
AFTXS_API aftxs_status aftxs_dataset_from_arrays(size_t n, size_t k, const double* x, const double* z,
                                                 aftxs_dataset** out);
AFTXS_API aftxs_status aftxs_dataset_read_csv(const char* path, aftxs_dataset** out);
AFTXS_API aftxs_status aftxs_dataset_write_csv(const aftxs_dataset* data, const char* path);
AFTXS_API aftxs_status aftxs_dataset_shape(const aftxs_dataset* data, size_t* n, size_t* k);
/* Copies record i: x and k covariates. */
AFTXS_API aftxs_status aftxs_dataset_record(const aftxs_dataset* data, size_t i, double* x, double* z);
AFTXS_API void aftxs_dataset_free(aftxs_dataset* data);

/* Information bound of the spec under a variant, as JSON {info, bound, variant}.
 * info and bound may be NULL; otherwise they receive k*k values row-major. */
AFTXS_API aftxs_status aftxs_information_bound(const aftxs_spec* spec, aftxs_variant variant, char** json,
                                               double* info, double* bound);

typedef struct aftxs_estimate_options {
  aftxs_variant variant;
  aftxs_estimator estimator;
  aftxs_hazard_method hazard;
  double bandwidth_scale; /* Silverman multiplier */
  double bandwidth;       /* > 0 fixes the bandwidth */
  double trim_exponent;
  double clip_bound;      /* > 0 overrides max(ln n, 1) */
  uint64_t seed;
} aftxs_estimate_options;

AFTXS_API void aftxs_estimate_options_init(aftxs_estimate_options* opts);

/* known_h supplies the covariate law (required for AFTXS_KNOWN_H). theta may be
 * NULL; otherwise it receives the k estimated coefficients. */
AFTXS_API aftxs_status aftxs_estimate(const aftxs_dataset* data, const aftxs_spec* known_h,
                                      const aftxs_estimate_options* opts, char** result_json, double* theta);

/* Runs the Monte Carlo study described by a JSON config file; jobs = 0 picks
 * the hardware concurrency. keep_estimates = 1 adds per-replication estimates. */
AFTXS_API aftxs_status aftxs_study_run(const char* config_path, unsigned jobs, int keep_estimates,
                                       char** report_json);

#ifdef __cplusplus
}
#endif

#endif
