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

#pragma once

// Expression features of a score-aligned performance.
//
// Onset-wise features (tempo, velocity) are indexed by the distinct score
// onsets of the piece; note-wise features (timing, articulation) by note.
//
//   tempo         performed IOI / score IOI of the mean performed onsets, s/beat.
//                 One value per IOI segment, so d = |grid| - 1.
//   velocity      mean MIDI velocity per score onset.
//   timing        note onset minus the mean onset of its score onset, in ms.
//   articulation  log2(perf_duration / (score_duration * beat_period)), where the
//                 beat period is the tempo value of the segment starting at the
//                 note's onset (the last segment for final-onset notes).

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "expeval/perfalign.hpp"

namespace expeval {

enum class FeatureKind { Tempo, Velocity, Timing, Articulation };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);
constexpr bool is_onset_wise(FeatureKind kind) {
  return kind == FeatureKind::Tempo || kind == FeatureKind::Velocity;
}

struct ExpressionCurve {
  FeatureKind kind = FeatureKind::Tempo;
  std::vector<double> onsets;
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const ExpressionCurve&, const ExpressionCurve&) = default;
};

/// Note-wise values in canonical note order.
struct NoteWiseFeature {
  FeatureKind kind = FeatureKind::Timing;
  std::vector<std::string> note_ids;
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  double at(std::string_view note_id) const;
  friend bool operator==(const NoteWiseFeature&, const NoteWiseFeature&) = default;
};

using Feature = std::variant<ExpressionCurve, NoteWiseFeature>;

FeatureKind kind_of(const Feature& f);
const std::vector<double>& values_of(const Feature& f);

/// Notes of a record grouped by score onset. Notes are contiguous per group
/// because records are kept in canonical order.
struct OnsetGroups {
  std::vector<double> grid;
  std::vector<std::size_t> begin;  // grid.size() + 1 entries
  std::vector<double> mean_perf_onset;
  std::vector<int> measure;        // measure of the first note at each onset

  std::size_t size() const noexcept { return grid.size(); }
  std::size_t group_of_note(std::size_t note) const;
};

OnsetGroups group_by_onset(const PerformanceRecord& perf);

ExpressionCurve tempo_curve(const PerformanceRecord& perf);
ExpressionCurve velocity_curve(const PerformanceRecord& perf);
NoteWiseFeature timing_deviations(const PerformanceRecord& perf);
NoteWiseFeature articulation(const PerformanceRecord& perf, const ExpressionCurve& tempo);

Feature extract(const PerformanceRecord& perf, FeatureKind kind);

struct RenderResult {
  PerformanceRecord performance;
  std::size_t clipped = 0;  // velocity notes clipped into [1,127]
};

/// Rebuilds `base` so that extracting `kind_of(target)` yields `target`, leaving
/// the other three features of `base` unchanged.
///
/// Velocities are MIDI integers: per onset the shifted velocities are rounded
/// with their sum kept as close as possible to the target mean, so the rendered
/// mean matches within 0.5 / (notes at the onset) unless clipping occurs.
RenderResult render_performance(const PerformanceRecord& base, const Feature& target);

/// Measure number of every dimension of `kind` for this record.
std::vector<int> dimension_measures(const PerformanceRecord& perf, FeatureKind kind);

/// One feature of every performance in a corpus, stacked performer x dimension,
/// optionally restricted to the dimensions inside measures [first, last].
struct CorpusFeatures {
  FeatureKind kind = FeatureKind::Tempo;
  std::vector<std::string> performers;
  std::vector<double> onsets;         // score onset of each dimension
  std::vector<std::string> note_ids;  // note-wise kinds only
  std::vector<int> measures;
  std::vector<std::vector<double>> values;

  std::size_t dim() const noexcept { return onsets.size(); }
};

struct MeasureRange {
  int first = 1;
  int last = 1;
};

CorpusFeatures corpus_features(const PieceCorpus& corpus, FeatureKind kind,
                               std::optional<MeasureRange> range = std::nullopt);

}  // namespace expeval
