/*
 * Copyright (c) 2026 The expeval Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the expeval library.
 *
 * Every fallible function returns an expeval_status; on failure a message is
 * available from expeval_last_error() on the calling thread until the next
 * call. Handles are opaque and owned by the caller, who releases them with the
 * matching *_free function. Strings returned through `char**` are allocated
 * by the library and released with expeval_string_free().
 */

#ifndef EXPEVAL_H
#define EXPEVAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(EXPEVAL_BUILDING_LIBRARY)
#    define EXPEVAL_API __declspec(dllexport)
#  else
#    define EXPEVAL_API __declspec(dllimport)
#  endif
#else
#  define EXPEVAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum expeval_status {
  EXPEVAL_OK = 0,
  EXPEVAL_ERR_INVALID_ARGUMENT = 1,
  EXPEVAL_ERR_FORMAT_VERSION = 2,
  EXPEVAL_ERR_ROW = 3,
  EXPEVAL_ERR_VALIDATION = 4,
  EXPEVAL_ERR_REFUSED_WRITE = 5,
  EXPEVAL_ERR_SCORE_MISMATCH = 6,
  EXPEVAL_ERR_CORPUS_TOO_SMALL = 7,
  EXPEVAL_ERR_SHAPE = 8,
  EXPEVAL_ERR_DOMAIN = 9,
  EXPEVAL_ERR_CONSTANT_CURVE = 10,
  EXPEVAL_ERR_NON_POSITIVE_TEMPO = 11,
  EXPEVAL_ERR_TOO_FEW_DIMENSIONS = 12,
  EXPEVAL_ERR_SAMPLING = 13,
  EXPEVAL_ERR_CALIBRATION_INFEASIBLE = 14,
  EXPEVAL_ERR_TOO_FEW_PERFORMANCES = 15,
  EXPEVAL_ERR_UNDEFINED_RELIABILITY = 16,
  EXPEVAL_ERR_NO_EXCERPT = 17,
  EXPEVAL_ERR_IO = 18,
  EXPEVAL_ERR_NULL_ARGUMENT = 98,
  EXPEVAL_ERR_INTERNAL = 99
} expeval_status;

typedef enum expeval_feature {
  EXPEVAL_FEATURE_TEMPO = 0,
  EXPEVAL_FEATURE_VELOCITY = 1,
  EXPEVAL_FEATURE_TIMING = 2,
  EXPEVAL_FEATURE_ARTICULATION = 3
} expeval_feature;

typedef enum expeval_standardization {
  EXPEVAL_STD_NONE = 0,
  EXPEVAL_STD_MEAN = 1,
  EXPEVAL_STD_MEAN_LOG = 2,
  EXPEVAL_STD_STANDARD_SCORE = 3
} expeval_standardization;

typedef enum expeval_scheme {
  EXPEVAL_SCHEME_QUARTILES = 0,
  EXPEVAL_SCHEME_TAILS_5_90_5 = 1
} expeval_scheme;

typedef struct expeval_performance expeval_performance;
typedef struct expeval_corpus expeval_corpus;
typedef struct expeval_curve expeval_curve;
typedef struct expeval_grid expeval_grid;

EXPEVAL_API const char* expeval_version(void);
EXPEVAL_API const char* expeval_last_error(void);
EXPEVAL_API void expeval_string_free(char* s);

EXPEVAL_API expeval_status expeval_feature_from_name(const char* name, expeval_feature* out);
EXPEVAL_API expeval_status expeval_standardization_from_name(const char* name, expeval_standardization* out);
EXPEVAL_API expeval_status expeval_scheme_from_name(const char* name, expeval_scheme* out);
EXPEVAL_API const char* expeval_feature_name(expeval_feature feature);
EXPEVAL_API const char* expeval_standardization_name(expeval_standardization standardization);

/* Performances (perfalign v1) */

EXPEVAL_API expeval_status expeval_performance_parse(const char* text, const char* performer_id,
                                                     const char* piece_id, expeval_performance** out);
/* performer id = file stem */
EXPEVAL_API expeval_status expeval_performance_read(const char* path, const char* piece_id,
                                                    expeval_performance** out);
EXPEVAL_API expeval_status expeval_performance_write(const expeval_performance* perf, char** out_text);
EXPEVAL_API expeval_status expeval_performance_note_count(const expeval_performance* perf, size_t* out);
EXPEVAL_API const char* expeval_performance_performer_id(const expeval_performance* perf);
EXPEVAL_API void expeval_performance_free(expeval_performance* perf);

/* Corpora: one directory per piece, one *.perfalign file per performer */

EXPEVAL_API expeval_status expeval_corpus_load_dir(const char* dir, expeval_corpus** out);
EXPEVAL_API expeval_status expeval_corpus_size(const expeval_corpus* corpus, size_t* performances,
                                               size_t* onsets);
EXPEVAL_API const char* expeval_corpus_piece_id(const expeval_corpus* corpus);
EXPEVAL_API void expeval_corpus_free(expeval_corpus* corpus);

/* Expression features */

EXPEVAL_API expeval_status expeval_curve_extract(const expeval_performance* perf, expeval_feature feature,
                                                 expeval_curve** out);
EXPEVAL_API expeval_status expeval_curve_from_json(const char* json, expeval_curve** out);
EXPEVAL_API expeval_status expeval_curve_to_json(const expeval_curve* curve, const char* piece_id,
                                                 const char* performer_id, char** out_json);
EXPEVAL_API expeval_status expeval_curve_values(const expeval_curve* curve, const double** values, size_t* dim);
EXPEVAL_API expeval_status expeval_curve_feature(const expeval_curve* curve, expeval_feature* out);
EXPEVAL_API void expeval_curve_free(expeval_curve* curve);

/* Rebuild `base` so that its `target` feature equals the curve. `clipped`
 * (optional) receives the number of velocities clipped into [1,127]. */
EXPEVAL_API expeval_status expeval_render(const expeval_performance* base, const expeval_curve* target,
                                          expeval_performance** out, size_t* clipped);

/* C(n,k) / 2^n */
EXPEVAL_API expeval_status expeval_binomial_probability(long n, long k, double* out);

/* Randomization and calibration. first_measure/last_measure restrict the
 * curves to an excerpt; 0 for both uses the whole piece. */

typedef struct expeval_sample_options {
  expeval_feature feature;
  expeval_scheme scheme;
  double sigma;
  uint64_t seed;
  size_t count;
  int first_measure;
  int last_measure;
} expeval_sample_options;

EXPEVAL_API void expeval_sample_default_options(expeval_sample_options* options);
/* JSON array of curve documents, each with a `randomization` block */
EXPEVAL_API expeval_status expeval_sample(const expeval_corpus* corpus, const expeval_sample_options* options,
                                          char** out_json);

typedef struct expeval_calibrate_options {
  expeval_feature feature;
  expeval_scheme scheme;
  expeval_standardization standardization;
  double target;
  double tolerance;
  size_t mc_samples;
  uint64_t seed;
  unsigned threads;
  int first_measure;
  int last_measure;
} expeval_calibrate_options;

typedef struct expeval_calibration {
  double sigma;
  double achieved_rate;
  double rate_at_zero;
  double sigma_bar;
  int iterations;
  size_t mc_samples;
  int converged;
  int monotone;
} expeval_calibration;

EXPEVAL_API void expeval_calibrate_default_options(expeval_calibrate_options* options);
EXPEVAL_API expeval_status expeval_calibrate(const expeval_corpus* corpus, const expeval_calibrate_options* options,
                                             expeval_calibration* out);
/* Monte-Carlo identification rate at a fixed sigma (target/tolerance ignored) */
EXPEVAL_API expeval_status expeval_identification_rate(const expeval_corpus* corpus,
                                                       const expeval_calibrate_options* options, double sigma,
                                                       double* out_rate);

/* Ranked excerpt windows as a JSON array */
EXPEVAL_API expeval_status expeval_scan(const expeval_corpus* corpus, expeval_feature feature, int window_measures,
                                        size_t min_onsets, char** out_json);

/* Experiment grid */

typedef struct expeval_evaluate_options {
  const expeval_feature* features;
  size_t n_features;
  const expeval_standardization* standardizations;
  size_t n_standardizations;
  size_t randoms_per_piece;
  uint64_t seed;
  unsigned threads;
} expeval_evaluate_options;

/* Fills in velocity+tempo, all four standardizations, 64 randoms, seed 0, 1 thread. */
EXPEVAL_API void expeval_evaluate_default_options(expeval_evaluate_options* options);
/* Pieces that fail to load are recorded in the report, not returned as errors. */
EXPEVAL_API expeval_status expeval_evaluate(const char* const* piece_dirs, size_t n_dirs,
                                            const expeval_evaluate_options* options, expeval_grid** out);
EXPEVAL_API expeval_status expeval_grid_counts(const expeval_grid* grid, size_t* pieces, size_t* evaluated_pieces,
                                               size_t* experiment_cells, size_t* failed_cells);
EXPEVAL_API expeval_status expeval_grid_tsv(const expeval_grid* grid, expeval_standardization standardization,
                                            char** out_tsv);
EXPEVAL_API expeval_status expeval_grid_json(const expeval_grid* grid, char** out_json);
EXPEVAL_API void expeval_grid_free(expeval_grid* grid);

/* Synthetic corpora */

typedef struct expeval_synth_options {
  size_t pieces;
  size_t performers_min;
  size_t performers_max;
  size_t onsets_min;
  size_t onsets_max;
  double dispersion;
  uint64_t seed;
} expeval_synth_options;

EXPEVAL_API void expeval_synth_default_options(expeval_synth_options* options);
EXPEVAL_API expeval_status expeval_synth(const expeval_synth_options* options, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* EXPEVAL_H */
