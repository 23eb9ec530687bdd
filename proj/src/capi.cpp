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

#include "expeval.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <optional>
#include <set>
#include <string>

#include "expeval/error.hpp"
#include "expeval/evaluation.hpp"
#include "expeval/features.hpp"
#include "expeval/metrics.hpp"
#include "expeval/perfalign.hpp"
#include "expeval/randomizer.hpp"
#include "expeval/report.hpp"
#include "expeval/synth.hpp"

struct expeval_performance {
  expeval::PerformanceRecord record;
};

struct expeval_corpus {
  expeval::PieceCorpus corpus;
};

struct expeval_curve {
  expeval::Feature feature;
};

struct expeval_grid {
  expeval::GridResult result;
};

namespace {

thread_local std::string g_last_error;

expeval_status fail(expeval_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
expeval_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return EXPEVAL_OK;
  } catch (const expeval::Error& e) {
    return fail(static_cast<expeval_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EXPEVAL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EXPEVAL_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

expeval::FeatureKind to_kind(expeval_feature f) {
  switch (f) {
    case EXPEVAL_FEATURE_TEMPO: return expeval::FeatureKind::Tempo;
    case EXPEVAL_FEATURE_VELOCITY: return expeval::FeatureKind::Velocity;
    case EXPEVAL_FEATURE_TIMING: return expeval::FeatureKind::Timing;
    case EXPEVAL_FEATURE_ARTICULATION: return expeval::FeatureKind::Articulation;
  }
  throw expeval::InvalidArgumentError("unknown feature value " + std::to_string(static_cast<int>(f)));
}

expeval_feature from_kind(expeval::FeatureKind k) { return static_cast<expeval_feature>(static_cast<int>(k)); }

expeval::StandardizationKind to_std(expeval_standardization s) {
  if (s < EXPEVAL_STD_NONE || s > EXPEVAL_STD_STANDARD_SCORE)
    throw expeval::InvalidArgumentError("unknown standardization value " + std::to_string(static_cast<int>(s)));
  return static_cast<expeval::StandardizationKind>(static_cast<int>(s));
}

expeval::QuantileScheme to_scheme(expeval_scheme s) {
  if (s == EXPEVAL_SCHEME_QUARTILES) return expeval::QuantileScheme::Quartiles;
  if (s == EXPEVAL_SCHEME_TAILS_5_90_5) return expeval::QuantileScheme::Tails5_90_5;
  throw expeval::InvalidArgumentError("unknown scheme value " + std::to_string(static_cast<int>(s)));
}

std::optional<expeval::MeasureRange> to_range(int first, int last) {
  if (first == 0 && last == 0) return std::nullopt;
  if (first < 1 || last < first) throw expeval::InvalidArgumentError("invalid measure range");
  return expeval::MeasureRange{first, last};
}

#define EXPEVAL_REQUIRE(ptr)                                                 \
  do {                                                                       \
    if ((ptr) == nullptr) return fail(EXPEVAL_ERR_NULL_ARGUMENT, #ptr " is null"); \
  } while (0)

}  // namespace

extern "C" {

const char* expeval_version(void) { return expeval::kVersion; }

const char* expeval_last_error(void) { return g_last_error.c_str(); }

void expeval_string_free(char* s) { std::free(s); }

expeval_status expeval_feature_from_name(const char* name, expeval_feature* out) {
  EXPEVAL_REQUIRE(name);
  EXPEVAL_REQUIRE(out);
  return guarded([&] { *out = from_kind(expeval::parse_feature_kind(name)); });
}

expeval_status expeval_standardization_from_name(const char* name, expeval_standardization* out) {
  EXPEVAL_REQUIRE(name);
  EXPEVAL_REQUIRE(out);
  return guarded([&] {
    *out = static_cast<expeval_standardization>(static_cast<int>(expeval::parse_standardization(name)));
  });
}

expeval_status expeval_scheme_from_name(const char* name, expeval_scheme* out) {
  EXPEVAL_REQUIRE(name);
  EXPEVAL_REQUIRE(out);
  return guarded([&] {
    *out = expeval::parse_quantile_scheme(name) == expeval::QuantileScheme::Quartiles ? EXPEVAL_SCHEME_QUARTILES
                                                                                       : EXPEVAL_SCHEME_TAILS_5_90_5;
  });
}

const char* expeval_feature_name(expeval_feature feature) {
  switch (feature) {
    case EXPEVAL_FEATURE_TEMPO: return "tempo";
    case EXPEVAL_FEATURE_VELOCITY: return "velocity";
    case EXPEVAL_FEATURE_TIMING: return "timing";
    case EXPEVAL_FEATURE_ARTICULATION: return "articulation";
  }
  return "unknown";
}

const char* expeval_standardization_name(expeval_standardization standardization) {
  switch (standardization) {
    case EXPEVAL_STD_NONE: return "none";
    case EXPEVAL_STD_MEAN: return "mean";
    case EXPEVAL_STD_MEAN_LOG: return "mean_log";
    case EXPEVAL_STD_STANDARD_SCORE: return "standard_score";
  }
  return "unknown";
}

expeval_status expeval_performance_parse(const char* text, const char* performer_id, const char* piece_id,
                                         expeval_performance** out) {
  EXPEVAL_REQUIRE(text);
  EXPEVAL_REQUIRE(performer_id);
  EXPEVAL_REQUIRE(piece_id);
  EXPEVAL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new expeval_performance{expeval::parse_performance(text, performer_id, piece_id)}; });
}

expeval_status expeval_performance_read(const char* path, const char* piece_id, expeval_performance** out) {
  EXPEVAL_REQUIRE(path);
  EXPEVAL_REQUIRE(piece_id);
  EXPEVAL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new expeval_performance{expeval::read_performance_file(path, piece_id)}; });
}

expeval_status expeval_performance_write(const expeval_performance* perf, char** out_text) {
  EXPEVAL_REQUIRE(perf);
  EXPEVAL_REQUIRE(out_text);
  *out_text = nullptr;
  return guarded([&] { *out_text = copy_string(expeval::write_performance(perf->record)); });
}

expeval_status expeval_performance_note_count(const expeval_performance* perf, size_t* out) {
  EXPEVAL_REQUIRE(perf);
  EXPEVAL_REQUIRE(out);
  *out = perf->record.notes().size();
  return EXPEVAL_OK;
}

const char* expeval_performance_performer_id(const expeval_performance* perf) {
  return perf ? perf->record.performer_id().c_str() : nullptr;
}

void expeval_performance_free(expeval_performance* perf) { delete perf; }

expeval_status expeval_corpus_load_dir(const char* dir, expeval_corpus** out) {
  EXPEVAL_REQUIRE(dir);
  EXPEVAL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new expeval_corpus{expeval::load_corpus_dir(dir)}; });
}

expeval_status expeval_corpus_size(const expeval_corpus* corpus, size_t* performances, size_t* onsets) {
  EXPEVAL_REQUIRE(corpus);
  if (performances) *performances = corpus->corpus.size();
  if (onsets) *onsets = corpus->corpus.onset_grid().size();
  return EXPEVAL_OK;
}

const char* expeval_corpus_piece_id(const expeval_corpus* corpus) {
  return corpus ? corpus->corpus.piece_id().c_str() : nullptr;
}

void expeval_corpus_free(expeval_corpus* corpus) { delete corpus; }

expeval_status expeval_curve_extract(const expeval_performance* perf, expeval_feature feature, expeval_curve** out) {
  EXPEVAL_REQUIRE(perf);
  EXPEVAL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new expeval_curve{expeval::extract(perf->record, to_kind(feature))}; });
}

expeval_status expeval_curve_from_json(const char* json, expeval_curve** out) {
  EXPEVAL_REQUIRE(json);
  EXPEVAL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    expeval::Json doc;
    try {
      doc = expeval::Json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      throw expeval::InvalidArgumentError(std::string("invalid JSON: ") + e.what());
    }
    *out = new expeval_curve{expeval::feature_from_json(doc)};
  });
}

expeval_status expeval_curve_to_json(const expeval_curve* curve, const char* piece_id, const char* performer_id,
                                     char** out_json) {
  EXPEVAL_REQUIRE(curve);
  EXPEVAL_REQUIRE(out_json);
  *out_json = nullptr;
  return guarded([&] {
    const auto doc = expeval::feature_to_json(curve->feature, piece_id ? piece_id : "", performer_id ? performer_id : "");
    *out_json = copy_string(doc.dump(2));
  });
}

expeval_status expeval_curve_values(const expeval_curve* curve, const double** values, size_t* dim) {
  EXPEVAL_REQUIRE(curve);
  const auto& v = expeval::values_of(curve->feature);
  if (values) *values = v.data();
  if (dim) *dim = v.size();
  return EXPEVAL_OK;
}

expeval_status expeval_curve_feature(const expeval_curve* curve, expeval_feature* out) {
  EXPEVAL_REQUIRE(curve);
  EXPEVAL_REQUIRE(out);
  *out = from_kind(expeval::kind_of(curve->feature));
  return EXPEVAL_OK;
}

void expeval_curve_free(expeval_curve* curve) { delete curve; }

expeval_status expeval_render(const expeval_performance* base, const expeval_curve* target,
                              expeval_performance** out, size_t* clipped) {
  EXPEVAL_REQUIRE(base);
  EXPEVAL_REQUIRE(target);
  EXPEVAL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto result = expeval::render_performance(base->record, target->feature);
    if (clipped) *clipped = result.clipped;
    *out = new expeval_performance{std::move(result.performance)};
  });
}

expeval_status expeval_binomial_probability(long n, long k, double* out) {
  EXPEVAL_REQUIRE(out);
  return guarded([&] { *out = expeval::binomial_exact_probability(n, k); });
}

void expeval_sample_default_options(expeval_sample_options* options) {
  if (!options) return;
  *options = expeval_sample_options{EXPEVAL_FEATURE_TEMPO, EXPEVAL_SCHEME_QUARTILES, 0.0, 0, 1, 0, 0};
}

expeval_status expeval_sample(const expeval_corpus* corpus, const expeval_sample_options* options, char** out_json) {
  EXPEVAL_REQUIRE(corpus);
  EXPEVAL_REQUIRE(options);
  EXPEVAL_REQUIRE(out_json);
  *out_json = nullptr;
  return guarded([&] {
    const auto kind = to_kind(options->feature);
    const auto scheme = to_scheme(options->scheme);
    const auto cf = expeval::corpus_features(corpus->corpus, kind, to_range(options->first_measure, options->last_measure));
    const auto avg = expeval::average_curve(cf.values);
    const auto partition = expeval::quantile_partition(avg, scheme);
    const expeval::RandomizationConfig config{scheme, options->sigma, options->seed, options->count};

    expeval::Json docs = expeval::Json::array();
    for (std::size_t i = 0; i < options->count; ++i) {
      auto values = expeval::sample_randomized_values(avg, partition, config, i, expeval::constraint_for(kind));
      expeval::Feature f;
      if (expeval::is_onset_wise(kind)) {
        f = expeval::ExpressionCurve{kind, cf.onsets, std::move(values)};
      } else {
        f = expeval::NoteWiseFeature{kind, cf.note_ids, std::move(values)};
      }
      docs.push_back(expeval::feature_to_json(f, corpus->corpus.piece_id(), "random-" + std::to_string(i),
                                              expeval::RandomizationInfo{scheme, options->sigma, options->seed, i}));
    }
    *out_json = copy_string(docs.dump(2));
  });
}

void expeval_calibrate_default_options(expeval_calibrate_options* options) {
  if (!options) return;
  *options = expeval_calibrate_options{EXPEVAL_FEATURE_TEMPO, EXPEVAL_SCHEME_QUARTILES, EXPEVAL_STD_STANDARD_SCORE,
                                       0.5, 0.01, 2000, 0, 1, 0, 0};
}

namespace {

expeval::FeatureMatrix calibration_experts(const expeval_corpus* corpus, const expeval_calibrate_options* options) {
  return expeval::corpus_features(corpus->corpus, to_kind(options->feature),
                                  to_range(options->first_measure, options->last_measure))
      .values;
}

}  // namespace

expeval_status expeval_calibrate(const expeval_corpus* corpus, const expeval_calibrate_options* options,
                                 expeval_calibration* out) {
  EXPEVAL_REQUIRE(corpus);
  EXPEVAL_REQUIRE(options);
  EXPEVAL_REQUIRE(out);
  return guarded([&] {
    expeval::CalibrationOptions opts;
    opts.scheme = to_scheme(options->scheme);
    opts.standardization = to_std(options->standardization);
    opts.target = options->target;
    opts.tolerance = options->tolerance;
    opts.mc_samples = options->mc_samples;
    opts.seed = options->seed;
    opts.threads = options->threads;
    const auto r = expeval::calibrate_noise_level(calibration_experts(corpus, options),
                                                  expeval::constraint_for(to_kind(options->feature)), opts);
    *out = expeval_calibration{r.sigma,      r.achieved_rate, r.rate_at_zero,     r.sigma_bar,
                               r.iterations, r.mc_samples,    r.converged ? 1 : 0, r.monotone ? 1 : 0};
  });
}

expeval_status expeval_identification_rate(const expeval_corpus* corpus, const expeval_calibrate_options* options,
                                           double sigma, double* out_rate) {
  EXPEVAL_REQUIRE(corpus);
  EXPEVAL_REQUIRE(options);
  EXPEVAL_REQUIRE(out_rate);
  return guarded([&] {
    const expeval::RateEstimator est(calibration_experts(corpus, options), to_scheme(options->scheme),
                                     expeval::constraint_for(to_kind(options->feature)),
                                     to_std(options->standardization), options->mc_samples, options->seed,
                                     options->threads);
    *out_rate = est.rate(sigma);
  });
}

expeval_status expeval_scan(const expeval_corpus* corpus, expeval_feature feature, int window_measures,
                            size_t min_onsets, char** out_json) {
  EXPEVAL_REQUIRE(corpus);
  EXPEVAL_REQUIRE(out_json);
  *out_json = nullptr;
  return guarded([&] {
    const auto windows = expeval::excerpt_scan(corpus->corpus, to_kind(feature), window_measures, min_onsets);
    expeval::Json docs = expeval::Json::array();
    for (const auto& w : windows)
      docs.push_back({{"piece_id", corpus->corpus.piece_id()},
                      {"feature", std::string(expeval::to_string(to_kind(feature)))},
                      {"start_measure", w.start_measure},
                      {"length", w.length},
                      {"mean_pairwise_correlation", w.mean_correlation},
                      {"onsets", w.onsets},
                      {"pairs", w.pairs}});
    *out_json = copy_string(docs.dump(2));
  });
}

void expeval_evaluate_default_options(expeval_evaluate_options* options) {
  if (!options) return;
  static const expeval_feature kFeatures[] = {EXPEVAL_FEATURE_VELOCITY, EXPEVAL_FEATURE_TEMPO};
  static const expeval_standardization kStds[] = {EXPEVAL_STD_NONE, EXPEVAL_STD_MEAN, EXPEVAL_STD_MEAN_LOG,
                                                  EXPEVAL_STD_STANDARD_SCORE};
  *options = expeval_evaluate_options{kFeatures, 2, kStds, 4, 64, 0, 1};
}

expeval_status expeval_evaluate(const char* const* piece_dirs, size_t n_dirs, const expeval_evaluate_options* options,
                                expeval_grid** out) {
  EXPEVAL_REQUIRE(piece_dirs);
  EXPEVAL_REQUIRE(options);
  EXPEVAL_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    expeval::GridOptions opts;
    opts.features.clear();
    for (size_t i = 0; i < options->n_features; ++i) opts.features.push_back(to_kind(options->features[i]));
    opts.standardizations.clear();
    for (size_t i = 0; i < options->n_standardizations; ++i)
      opts.standardizations.push_back(to_std(options->standardizations[i]));
    opts.randoms_per_piece = options->randoms_per_piece;
    opts.seed = options->seed;
    opts.threads = options->threads;

    std::vector<expeval::PieceCorpus> corpora;
    std::vector<expeval::GridFailure> load_failures;
    for (size_t i = 0; i < n_dirs; ++i) {
      if (!piece_dirs[i]) throw expeval::InvalidArgumentError("null piece directory");
      try {
        corpora.push_back(expeval::load_corpus_dir(piece_dirs[i]));
      } catch (const expeval::Error& e) {
        std::string id = std::filesystem::path(piece_dirs[i]).filename().string();
        load_failures.push_back({id, "", "", e.what()});
      }
    }
    auto result = expeval::run_experiment_grid(corpora, opts);
    result.failures.insert(result.failures.begin(), load_failures.begin(), load_failures.end());
    *out = new expeval_grid{std::move(result)};
  });
}

expeval_status expeval_grid_counts(const expeval_grid* grid, size_t* pieces, size_t* evaluated_pieces,
                                   size_t* experiment_cells, size_t* failed_cells) {
  EXPEVAL_REQUIRE(grid);
  const auto& r = grid->result;
  if (pieces) *pieces = r.pieces;
  if (evaluated_pieces) {
    std::set<std::string> ok;
    for (const auto& rep : r.reports)
      for (const auto& p : rep.per_piece) ok.insert(p.piece_id);
    *evaluated_pieces = ok.size();
  }
  if (experiment_cells) *experiment_cells = r.experiment_cells;
  if (failed_cells) *failed_cells = r.failed_cells;
  return EXPEVAL_OK;
}

expeval_status expeval_grid_tsv(const expeval_grid* grid, expeval_standardization standardization, char** out_tsv) {
  EXPEVAL_REQUIRE(grid);
  EXPEVAL_REQUIRE(out_tsv);
  *out_tsv = nullptr;
  return guarded([&] { *out_tsv = copy_string(expeval::grid_report_tsv(grid->result, to_std(standardization))); });
}

expeval_status expeval_grid_json(const expeval_grid* grid, char** out_json) {
  EXPEVAL_REQUIRE(grid);
  EXPEVAL_REQUIRE(out_json);
  *out_json = nullptr;
  return guarded([&] { *out_json = copy_string(expeval::grid_report_json(grid->result).dump(2)); });
}

void expeval_grid_free(expeval_grid* grid) { delete grid; }

void expeval_synth_default_options(expeval_synth_options* options) {
  if (!options) return;
  const expeval::SynthOptions d;
  *options = expeval_synth_options{d.pieces,     d.performers_min, d.performers_max, d.onsets_min,
                                   d.onsets_max, d.dispersion,     d.seed};
}

expeval_status expeval_synth(const expeval_synth_options* options, const char* out_dir) {
  EXPEVAL_REQUIRE(options);
  EXPEVAL_REQUIRE(out_dir);
  return guarded([&] {
    expeval::SynthOptions opts;
    opts.pieces = options->pieces;
    opts.performers_min = options->performers_min;
    opts.performers_max = options->performers_max;
    opts.onsets_min = options->onsets_min;
    opts.onsets_max = options->onsets_max;
    opts.dispersion = options->dispersion;
    opts.seed = options->seed;
    expeval::write_synthetic_corpus(expeval::synthesize_corpus(opts), out_dir);
  });
}

}  // extern "C"
