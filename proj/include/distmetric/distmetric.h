// Copyright (c) 2026 The distmetric Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to distmetric: Frechet and kernel (MMD) distances between
 * speech-embedding sets, multivariate normality tests, SNR-controlled noise
 * mixing, subsampling sweeps and MOS correlation.
 *
 * Objects are opaque handles created by dm_*_create / dm_*_read and released
 * with the matching dm_*_destroy. Every fallible call returns a dm_status;
 * on failure dm_last_error() holds a message for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * dm_string_free.
 */
#ifndef DISTMETRIC_DISTMETRIC_H_
#define DISTMETRIC_DISTMETRIC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DISTMETRIC_BUILDING_LIBRARY)
#define DM_API __attribute__((visibility("default")))
#else
#define DM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dm_status {
  DM_OK = 0,
  DM_ERR_FORMAT,
  DM_ERR_CONSISTENCY,
  DM_ERR_DATA,
  DM_ERR_IO,
  DM_ERR_INSUFFICIENT_SAMPLES,
  DM_ERR_DOMAIN,
  DM_ERR_NOT_PSD,
  DM_ERR_DIMENSION,
  DM_ERR_DEGENERATE_DATA,
  DM_ERR_SINGULAR_COVARIANCE,
  DM_ERR_SILENT_SIGNAL,
  DM_ERR_SILENT_NOISE,
  DM_ERR_RATE_MISMATCH,
  DM_ERR_EMPTY_CORPUS,
  DM_ERR_DEGENERATE_BASELINE,
  DM_ERR_MISSING_CONDITION,
  DM_ERR_INSUFFICIENT_DATA,
  DM_ERR_INVALID_ARGUMENT,
  DM_ERR_INTERNAL
} dm_status;

DM_API const char* dm_version(void);
DM_API const char* dm_status_name(dm_status status);
/* Nonzero for bad files or arguments, zero for computation failures. */
DM_API int dm_status_is_input_error(dm_status status);
/* Message of the last failed call on this thread ("" if none). */
DM_API const char* dm_last_error(void);
DM_API void dm_string_free(char* s);

/* ---- context: threads, seed, pair budget ----------------------------- */

typedef struct dm_context dm_context;

DM_API dm_status dm_context_create(dm_context** out);
DM_API void dm_context_destroy(dm_context* ctx);
/* 0 selects the hardware concurrency. Results never depend on it. */
DM_API dm_status dm_context_set_threads(dm_context* ctx, unsigned threads);
DM_API dm_status dm_context_set_seed(dm_context* ctx, uint64_t seed);
/* Pair budget of the median-heuristic bandwidth (default 100000). */
DM_API dm_status dm_context_set_max_pairs(dm_context* ctx, uint64_t max_pairs);

/* ---- embedding sets ---------------------------------------------------- */

typedef struct dm_embedding_set dm_embedding_set;

typedef enum dm_precision { DM_FLOAT32 = 0, DM_FLOAT64 = 1 } dm_precision;

/* NPY v1.0 (<f4 or <f8, C order, 2-D) plus a JSON manifest. */
DM_API dm_status dm_embedding_set_read(const char* matrix_path, const char* manifest_path,
                                       dm_embedding_set** out);
DM_API dm_status dm_embedding_set_write(const dm_embedding_set* set, const char* matrix_path,
                                        const char* manifest_path, dm_precision precision);
/* Row-major rows x cols data. durations may be NULL; a negative duration
 * entry means "absent". */
DM_API dm_status dm_embedding_set_create(size_t rows, size_t cols, const double* data,
                                         const char* const* utt_ids,
                                         const char* const* speaker_ids,
                                         const double* durations, dm_embedding_set** out);
DM_API void dm_embedding_set_destroy(dm_embedding_set* set);
DM_API size_t dm_embedding_set_rows(const dm_embedding_set* set);
DM_API size_t dm_embedding_set_cols(const dm_embedding_set* set);
DM_API size_t dm_embedding_set_speakers(const dm_embedding_set* set);
/* Pointer to the row-major matrix, valid for the lifetime of the set. */
DM_API const double* dm_embedding_set_data(const dm_embedding_set* set);

/* ---- metrics ------------------------------------------------------------ */

typedef struct dm_fsd_result {
  double value;     /* clamped at 0 */
  double raw_value; /* before clamping */
  size_t n_ref;
  size_t n_gen;
  size_t dim;
} dm_fsd_result;

DM_API dm_status dm_compute_fsd(const dm_context* ctx, const dm_embedding_set* ref,
                                const dm_embedding_set* gen, dm_fsd_result* out);

typedef struct dm_kernel_spec {
  int median_heuristic; /* nonzero: ignore sigma, use the median heuristic */
  double sigma;
} dm_kernel_spec;

typedef struct dm_smmd_result {
  double value;
  double sigma_used;
  size_t m;
  size_t n;
} dm_smmd_result;

DM_API dm_status dm_compute_smmd(const dm_context* ctx, const dm_embedding_set* ref,
                                 const dm_embedding_set* gen, dm_kernel_spec kernel,
                                 dm_smmd_result* out);
DM_API dm_status dm_median_heuristic_sigma(const dm_context* ctx, const dm_embedding_set* ref,
                                           const dm_embedding_set* gen, double* sigma);

/* ---- normality ------------------------------------------------------------ */

typedef enum dm_normality_test {
  DM_MARDIA_SKEWNESS = 0,
  DM_MARDIA_KURTOSIS = 1,
  DM_HENZE_ZIRKLER = 2
} dm_normality_test;

typedef struct dm_normality_report {
  dm_normality_test test;
  double statistic;
  double p_value;
  double log10_p;
  double moment; /* b1,d / b2,d / beta */
  size_t n;
  size_t d;
  size_t floored_eigenvalues;
} dm_normality_report;

DM_API const char* dm_normality_test_name(dm_normality_test test);
/* allow_pseudo_inverse: floor near-zero covariance eigenvalues instead of
 * failing with DM_ERR_SINGULAR_COVARIANCE. */
DM_API dm_status dm_normality_run(const dm_context* ctx, const dm_embedding_set* set,
                                  dm_normality_test test, int allow_pseudo_inverse,
                                  dm_normality_report* out);

/* ---- noise mixing --------------------------------------------------------- */

typedef enum dm_noise_source { DM_NOISE_GAUSSIAN = 0, DM_NOISE_CORPUS = 1 } dm_noise_source;

typedef struct dm_noise_spec {
  dm_noise_source source;
  const char* corpus_dir; /* DM_NOISE_CORPUS only */
  double snr_db;
  uint64_t seed;
} dm_noise_spec;

typedef struct dm_mix_result {
  double alpha;
  double achieved_snr_db;
  double clip_fraction;
} dm_mix_result;

DM_API double dm_measure_power(const double* samples, size_t count);
/* Mixes `count` clean samples at spec->snr_db into `mixed` (count entries). */
DM_API dm_status dm_mix_at_snr(const double* clean, size_t count, uint32_t sample_rate_hz,
                               const dm_noise_spec* spec, double* mixed, dm_mix_result* out);
/* Writes the per-file JSON report to *report_json. */
DM_API dm_status dm_perturb_corpus(const dm_context* ctx, const char* in_dir,
                                   const char* out_dir, const dm_noise_spec* spec, int strict,
                                   char** report_json);

/* ---- sweeps and curves ---------------------------------------------------- */

typedef struct dm_curve dm_curve;

typedef enum dm_sweep_strategy {
  DM_SWEEP_RANDOM = 0,
  DM_SWEEP_SPEAKER = 1,
  DM_SWEEP_SPEAKER_COUNT = 2
} dm_sweep_strategy;

typedef enum dm_metric { DM_METRIC_FSD = 0, DM_METRIC_SMMD = 1 } dm_metric;

typedef struct dm_curve_point {
  double condition;
  dm_metric metric;
  double value;
  unsigned repeat_index;
  size_t subset_size;
  size_t n_speakers;
} dm_curve_point;

/* Bit flags selecting the metrics of a fraction sweep. */
#define DM_METRIC_MASK_FSD 1u
#define DM_METRIC_MASK_SMMD 2u
#define DM_METRIC_MASK_ALL (DM_METRIC_MASK_FSD | DM_METRIC_MASK_SMMD)

/* Repeat r uses the context seed + r. */
DM_API dm_status dm_run_fraction_sweep(const dm_context* ctx, const dm_embedding_set* ref,
                                       const dm_embedding_set* gen, dm_sweep_strategy strategy,
                                       const double* fractions, size_t n_fractions,
                                       unsigned repeats, unsigned metric_mask,
                                       dm_kernel_spec kernel, dm_curve** out);
DM_API dm_status dm_run_snr_sweep(const dm_context* ctx, const dm_embedding_set* ref,
                                  const double* snrs_db, const dm_embedding_set* const* sets,
                                  size_t n_conditions, dm_kernel_spec kernel, dm_curve** out);
DM_API dm_status dm_curve_relative_change(const dm_curve* curve, double baseline_condition,
                                          dm_curve** out);
DM_API dm_status dm_curve_max_condition(const dm_curve* curve, double* out);
DM_API size_t dm_curve_size(const dm_curve* curve);
DM_API dm_status dm_curve_point_at(const dm_curve* curve, size_t index, dm_curve_point* out);
DM_API double dm_curve_sigma_used(const dm_curve* curve);
DM_API dm_status dm_curve_to_csv(const dm_curve* curve, char** out);
DM_API dm_status dm_curve_to_json(const dm_curve* curve, char** out);
DM_API void dm_curve_destroy(dm_curve* curve);

/* Parses "START:STOP:STEP" or "a,b,c" into a newly allocated array
 * (release with dm_doubles_free). */
DM_API dm_status dm_parse_range(const char* text, double** values, size_t* count);
DM_API void dm_doubles_free(double* values);

/* ---- MOS correlation ------------------------------------------------------ */

typedef enum dm_correlation_method { DM_PEARSON = 0, DM_SPEARMAN = 1 } dm_correlation_method;

typedef struct dm_correlation {
  dm_correlation_method method;
  double coefficient;
  size_t n;
} dm_correlation;

DM_API dm_status dm_correlate(const char* const* systems, const double* values, size_t n_values,
                              const char* const* mos_systems, const double* mos, size_t n_mos,
                              dm_correlation_method method, int case_insensitive,
                              dm_correlation* out);
/* metrics_csv: system,metric,value. metric_name may be NULL when the file
 * holds a single metric; *metric_used receives the metric correlated. */
DM_API dm_status dm_correlate_files(const char* metrics_csv, const char* metric_name,
                                    const char* mos_csv, dm_correlation_method method,
                                    int case_insensitive, dm_correlation* out,
                                    char** metric_used);

#ifdef __cplusplus
}
#endif

#endif /* DISTMETRIC_DISTMETRIC_H_ */
