#ifndef HANKELID_H
#define HANKELID_H

/* C interface to the identification library. Every handle is opaque and owned
 * by the caller once returned; release it with the matching _free function.
 * Functions return HKID_OK or an error status; hkid_last_error() then holds a
 * message for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(HKID_BUILDING)
#define HKID_API __attribute__((visibility("default")))
#else
#define HKID_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hkid_status {
  HKID_OK = 0,
  HKID_ERR_INVALID_ARGUMENT = 1,
  HKID_ERR_INSUFFICIENT_DATA = 2,
  HKID_ERR_NUMERICAL = 3,
  HKID_ERR_PARSE = 4,
  HKID_ERR_IO = 5,
  HKID_ERR_INTERNAL = 6
} hkid_status;

HKID_API const char* hkid_last_error(void);
HKID_API const char* hkid_status_string(hkid_status status);

/* Datasets. Sample buffers are row-major: u is samples x inputs, y is
 * samples x outputs. */
typedef struct hkid_dataset hkid_dataset;

HKID_API hkid_status hkid_dataset_create(size_t samples, size_t inputs, size_t outputs, const double* u,
                                         const double* y, hkid_dataset** out);
HKID_API hkid_status hkid_dataset_load_csv(const char* path, hkid_dataset** out);
HKID_API hkid_status hkid_dataset_save_csv(const hkid_dataset* data, const char* path);
HKID_API hkid_status hkid_dataset_dims(const hkid_dataset* data, size_t* samples, size_t* inputs, size_t* outputs);
HKID_API void hkid_dataset_free(hkid_dataset* data);

typedef enum hkid_weights { HKID_WEIGHTS_IDENTITY = 0, HKID_WEIGHTS_EMPIRICAL = 1 } hkid_weights;

typedef struct hkid_identify_options {
  int lags;            /* T */
  double epsilon;      /* likelihood-ratio resolution */
  hkid_weights weights;
  int max_order;       /* <= 0: no bound beyond pr */
  double sgp_armijo;
  double sgp_backtrack;
  double sgp_rel_tol;
  int sgp_max_iter;
  int literal_acceptance; /* 1: compare only against the previous lambda under the new basis */
} hkid_identify_options;

HKID_API void hkid_identify_options_default(hkid_identify_options* options);

typedef struct hkid_result hkid_result;

/* On a numerical failure the status is HKID_ERR_NUMERICAL and *out, when not
 * NULL, holds the partial result (hkid_result_complete returns 0). */
HKID_API hkid_status hkid_identify(const hkid_dataset* data, const hkid_identify_options* options,
                                   hkid_result** out);
HKID_API int hkid_result_complete(const hkid_result* result);
HKID_API hkid_status hkid_result_shape(const hkid_result* result, size_t* lags, size_t* outputs, size_t* inputs);
/* h_ij(k) for i < outputs, j < inputs, k = 1..lags, in (i, j, k) order. */
HKID_API hkid_status hkid_result_coefficients(const hkid_result* result, double* out, size_t len);
HKID_API size_t hkid_result_order(const hkid_result* result);
HKID_API hkid_status hkid_result_lambda(const hkid_result* result, double out[3]);
HKID_API hkid_status hkid_result_spline(const hkid_result* result, double* scale, double* decay);
HKID_API hkid_status hkid_result_noise(const hkid_result* result, double* out, size_t len);
HKID_API double hkid_result_seconds(const hkid_result* result);
/* Artifacts: impulse response CSV (i,j,k,value), trace JSON, text summary. */
HKID_API hkid_status hkid_result_write_impulse_csv(const hkid_result* result, const char* path);
HKID_API hkid_status hkid_result_write_trace_json(const hkid_result* result, const char* path);
HKID_API hkid_status hkid_result_write_summary(const hkid_result* result, const char* path);
/* Summary text; valid until the result is freed. */
HKID_API const char* hkid_result_summary(const hkid_result* result);
HKID_API void hkid_result_free(hkid_result* result);

/* Scenario simulation and Monte-Carlo benchmark. Numeric fields left at 0
 * (or NULL) select the scenario's defaults. */
typedef struct hkid_scenario_options {
  const char* scenario; /* "S1", "S2" or "S3" */
  size_t samples;
  uint64_t seed;
  int white_input;      /* 1: unit-variance white input regardless of scenario */
  double snr_lo;
  double snr_hi;
} hkid_scenario_options;

HKID_API void hkid_scenario_options_default(hkid_scenario_options* options);
HKID_API hkid_status hkid_simulate(const hkid_scenario_options* options, hkid_dataset** out);

typedef struct hkid_bench_options {
  hkid_scenario_options scenario;
  int runs;
  const char* estimators; /* comma-separated SH, SS, NN, NNW */
  int lags;
  double epsilon;
  hkid_weights weights;
  double cv_lo;
  double cv_hi;
  int cv_count;
  int threads;
} hkid_bench_options;

typedef struct hkid_bench hkid_bench;

HKID_API void hkid_bench_options_default(hkid_bench_options* options);
HKID_API hkid_status hkid_bench_run(const hkid_bench_options* options, hkid_bench** out);
HKID_API hkid_status hkid_bench_write_csv(const hkid_bench* bench, const char* path);
HKID_API hkid_status hkid_bench_write_json(const hkid_bench* bench, const char* path);
HKID_API hkid_status hkid_bench_write_fit_csv(const hkid_bench* bench, const char* path);
HKID_API void hkid_bench_free(hkid_bench* bench);

/* Finite-difference check of the marginal-likelihood gradient on random
 * instances. `corrupt` scales the analytic gradient (negative control). */
HKID_API hkid_status hkid_gradcheck(int instances, uint64_t seed, int corrupt, double* max_relative_error);

#ifdef __cplusplus
}
#endif

#endif
