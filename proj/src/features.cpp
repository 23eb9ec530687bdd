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

#include "expeval/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "expeval/error.hpp"

namespace expeval {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Tempo: return "tempo";
    case FeatureKind::Velocity: return "velocity";
    case FeatureKind::Timing: return "timing";
    case FeatureKind::Articulation: return "articulation";
  }
  return "unknown";
}

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "tempo") return FeatureKind::Tempo;
  if (name == "velocity" || name == "dynamics") return FeatureKind::Velocity;
  if (name == "timing") return FeatureKind::Timing;
  if (name == "articulation") return FeatureKind::Articulation;
  throw InvalidArgumentError("unknown feature '" + std::string(name) + "'");
}

double NoteWiseFeature::at(std::string_view note_id) const {
  for (std::size_t i = 0; i < note_ids.size(); ++i)
    if (note_ids[i] == note_id) return values[i];
  throw InvalidArgumentError("no entry for note '" + std::string(note_id) + "'");
}

FeatureKind kind_of(const Feature& f) {
  return std::visit([](const auto& x) { return x.kind; }, f);
}

const std::vector<double>& values_of(const Feature& f) {
  return std::visit([](const auto& x) -> const std::vector<double>& { return x.values; }, f);
}

std::size_t OnsetGroups::group_of_note(std::size_t note) const {
  auto it = std::upper_bound(begin.begin(), begin.end(), note);
  return static_cast<std::size_t>(it - begin.begin()) - 1;
}

OnsetGroups group_by_onset(const PerformanceRecord& perf) {
  OnsetGroups g;
  const auto& notes = perf.notes();
  for (std::size_t i = 0; i < notes.size(); ++i) {
    if (g.grid.empty() || g.grid.back() != notes[i].score_onset) {
      g.grid.push_back(notes[i].score_onset);
      g.begin.push_back(i);
      g.measure.push_back(notes[i].measure);
    }
  }
  g.begin.push_back(notes.size());
  g.mean_perf_onset.resize(g.grid.size());
  for (std::size_t k = 0; k < g.grid.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) sum += notes[i].perf_onset;
    g.mean_perf_onset[k] = sum / static_cast<double>(g.begin[k + 1] - g.begin[k]);
  }
  return g;
}

namespace {

ExpressionCurve tempo_from_groups(const OnsetGroups& g) {
  if (g.size() < 2) throw ValidationError({"fewer than 2 distinct score onsets"});
  ExpressionCurve c;
  c.kind = FeatureKind::Tempo;
  c.onsets.assign(g.grid.begin(), g.grid.end() - 1);
  c.values.resize(g.size() - 1);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double performed = g.mean_perf_onset[k + 1] - g.mean_perf_onset[k];
    if (!(performed > 0.0)) throw NonPositiveTempoError(k);
    c.values[k] = performed / (g.grid[k + 1] - g.grid[k]);
  }
  return c;
}

double beat_period_at(const ExpressionCurve& tempo, std::size_t group) {
  return tempo.values[std::min(group, tempo.values.size() - 1)];
}

void require_same_notes(const PerformanceRecord& base, const NoteWiseFeature& target) {
  if (target.note_ids.size() != target.values.size())
    throw ShapeError("note-wise feature has mismatched id/value counts");
  if (target.note_ids.size() != base.notes().size())
    throw ShapeError("note-wise target has " + std::to_string(target.note_ids.size()) +
                     " entries, base has " + std::to_string(base.notes().size()) + " notes");
}

std::unordered_map<std::string, double> index_entries(const NoteWiseFeature& f) {
  std::unordered_map<std::string, double> m;
  for (std::size_t i = 0; i < f.note_ids.size(); ++i) m.emplace(f.note_ids[i], f.values[i]);
  return m;
}

double lookup(const std::unordered_map<std::string, double>& m, const std::string& id) {
  auto it = m.find(id);
  if (it == m.end()) throw ShapeError("target has no entry for note '" + id + "'");
  return it->second;
}

void require_curve_shape(const ExpressionCurve& target, const std::vector<double>& onsets) {
  if (target.values.size() != onsets.size() || target.onsets.size() != target.values.size())
    throw ShapeError(std::string(to_string(target.kind)) + " target has d=" +
                     std::to_string(target.values.size()) + ", base has d=" +
                     std::to_string(onsets.size()));
  if (target.onsets != onsets) throw ShapeError("target onsets differ from the base's onset grid");
}

RenderResult render_tempo(const PerformanceRecord& base, const ExpressionCurve& target) {
  const auto g = group_by_onset(base);
  const auto old_tempo = tempo_from_groups(g);
  require_curve_shape(target, old_tempo.onsets);
  for (std::size_t k = 0; k < target.dim(); ++k)
    if (!(target.values[k] > 0.0)) throw DomainError("tempo target must be strictly positive");

  std::vector<double> means(g.size());
  means[0] = g.mean_perf_onset[0];
  for (std::size_t k = 0; k + 1 < g.size(); ++k)
    means[k + 1] = means[k] + target.values[k] * (g.grid[k + 1] - g.grid[k]);

  auto notes = base.notes();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double scale = beat_period_at(target, k) / beat_period_at(old_tempo, k);
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) {
      notes[i].perf_onset = means[k] + (notes[i].perf_onset - g.mean_perf_onset[k]);
      notes[i].perf_duration *= scale;
    }
  }
  return {PerformanceRecord::create(base.performer_id(), base.piece_id(), std::move(notes)), 0};
}

RenderResult render_velocity(const PerformanceRecord& base, const ExpressionCurve& target) {
  const auto g = group_by_onset(base);
  require_curve_shape(target, g.grid);
  auto notes = base.notes();
  std::size_t clipped = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const std::size_t count = g.begin[k + 1] - g.begin[k];
    double mean = 0.0;
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) mean += notes[i].velocity;
    mean /= static_cast<double>(count);
    const double delta = target.values[k] - mean;

    // Largest-remainder rounding keeps the integer sum at round(count * target).
    std::vector<double> wanted(count);
    std::vector<long> rounded(count);
    long total = 0;
    for (std::size_t j = 0; j < count; ++j) {
      wanted[j] = notes[g.begin[k] + j].velocity + delta;
      rounded[j] = static_cast<long>(std::floor(wanted[j]));
      total += rounded[j];
    }
    const long desired = std::lround(target.values[k] * static_cast<double>(count));
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return wanted[a] - rounded[a] > wanted[b] - rounded[b];
    });
    for (std::size_t j = 0; j < count && total < desired; ++j, ++total) ++rounded[order[j]];

    for (std::size_t j = 0; j < count; ++j) {
      long v = rounded[j];
      if (v < 1 || v > 127) {
        v = std::clamp(v, 1L, 127L);
        ++clipped;
      }
      notes[g.begin[k] + j].velocity = static_cast<int>(v);
    }
  }
  return {PerformanceRecord::create(base.performer_id(), base.piece_id(), std::move(notes)), clipped};
}

RenderResult render_timing(const PerformanceRecord& base, const NoteWiseFeature& target) {
  require_same_notes(base, target);
  const auto g = group_by_onset(base);
  const auto entries = index_entries(target);
  auto notes = base.notes();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const std::size_t count = g.begin[k + 1] - g.begin[k];
    double mean_ms = 0.0;
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) mean_ms += lookup(entries, notes[i].note_id);
    mean_ms /= static_cast<double>(count);
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) {
      const double ms = lookup(entries, notes[i].note_id) - mean_ms;
      notes[i].perf_onset = g.mean_perf_onset[k] + ms / 1000.0;
    }
  }
  return {PerformanceRecord::create(base.performer_id(), base.piece_id(), std::move(notes)), 0};
}

RenderResult render_articulation(const PerformanceRecord& base, const NoteWiseFeature& target) {
  require_same_notes(base, target);
  const auto g = group_by_onset(base);
  const auto tempo = tempo_from_groups(g);
  const auto entries = index_entries(target);
  auto notes = base.notes();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double bp = beat_period_at(tempo, k);
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i)
      notes[i].perf_duration = std::exp2(lookup(entries, notes[i].note_id)) * notes[i].score_duration * bp;
  }
  return {PerformanceRecord::create(base.performer_id(), base.piece_id(), std::move(notes)), 0};
}

}  // namespace

ExpressionCurve tempo_curve(const PerformanceRecord& perf) { return tempo_from_groups(group_by_onset(perf)); }

ExpressionCurve velocity_curve(const PerformanceRecord& perf) {
  const auto g = group_by_onset(perf);
  ExpressionCurve c;
  c.kind = FeatureKind::Velocity;
  c.onsets = g.grid;
  c.values.resize(g.size());
  const auto& notes = perf.notes();
  for (std::size_t k = 0; k < g.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) sum += notes[i].velocity;
    c.values[k] = sum / static_cast<double>(g.begin[k + 1] - g.begin[k]);
  }
  return c;
}

NoteWiseFeature timing_deviations(const PerformanceRecord& perf) {
  const auto g = group_by_onset(perf);
  NoteWiseFeature f;
  f.kind = FeatureKind::Timing;
  const auto& notes = perf.notes();
  f.note_ids.reserve(notes.size());
  f.values.reserve(notes.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) {
      f.note_ids.push_back(notes[i].note_id);
      f.values.push_back(g.begin[k + 1] - g.begin[k] == 1
                             ? 0.0
                             : (notes[i].perf_onset - g.mean_perf_onset[k]) * 1000.0);
    }
  }
  return f;
}

NoteWiseFeature articulation(const PerformanceRecord& perf, const ExpressionCurve& tempo) {
  const auto g = group_by_onset(perf);
  if (tempo.kind != FeatureKind::Tempo || tempo.dim() + 1 != g.size())
    throw ShapeError("articulation needs the tempo curve of the same performance");
  NoteWiseFeature f;
  f.kind = FeatureKind::Articulation;
  const auto& notes = perf.notes();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double bp = beat_period_at(tempo, k);
    for (std::size_t i = g.begin[k]; i < g.begin[k + 1]; ++i) {
      f.note_ids.push_back(notes[i].note_id);
      f.values.push_back(std::log2(notes[i].perf_duration / (notes[i].score_duration * bp)));
    }
  }
  return f;
}

Feature extract(const PerformanceRecord& perf, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Tempo: return tempo_curve(perf);
    case FeatureKind::Velocity: return velocity_curve(perf);
    case FeatureKind::Timing: return timing_deviations(perf);
    case FeatureKind::Articulation: return articulation(perf, tempo_curve(perf));
  }
  throw InvalidArgumentError("unknown feature kind");
}

RenderResult render_performance(const PerformanceRecord& base, const Feature& target) {
  if (base.empty()) throw InvalidArgumentError("cannot render from an empty performance");
  if (const auto* curve = std::get_if<ExpressionCurve>(&target)) {
    if (curve->kind == FeatureKind::Tempo) return render_tempo(base, *curve);
    if (curve->kind == FeatureKind::Velocity) return render_velocity(base, *curve);
    throw ShapeError("onset-wise curve with note-wise kind '" + std::string(to_string(curve->kind)) + "'");
  }
  const auto& nw = std::get<NoteWiseFeature>(target);
  if (nw.kind == FeatureKind::Timing) return render_timing(base, nw);
  if (nw.kind == FeatureKind::Articulation) return render_articulation(base, nw);
  throw ShapeError("note-wise feature with onset-wise kind '" + std::string(to_string(nw.kind)) + "'");
}

std::vector<int> dimension_measures(const PerformanceRecord& perf, FeatureKind kind) {
  const auto g = group_by_onset(perf);
  switch (kind) {
    case FeatureKind::Tempo: return {g.measure.begin(), g.measure.end() - 1};
    case FeatureKind::Velocity: return g.measure;
    default: break;
  }
  std::vector<int> out;
  out.reserve(perf.notes().size());
  for (const auto& n : perf.notes()) out.push_back(n.measure);
  return out;
}

CorpusFeatures corpus_features(const PieceCorpus& corpus, FeatureKind kind, std::optional<MeasureRange> range) {
  if (corpus.performances().empty()) throw InvalidArgumentError("corpus has no performances");
  const auto& first = corpus.performances().front();
  const auto measures = dimension_measures(first, kind);

  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < measures.size(); ++t)
    if (!range || (measures[t] >= range->first && measures[t] <= range->last)) keep.push_back(t);
  if (keep.empty()) throw ShapeError("no " + std::string(to_string(kind)) + " dimensions inside the measure range");

  CorpusFeatures out;
  out.kind = kind;
  for (const auto& perf : corpus.performances()) {
    const Feature f = extract(perf, kind);
    const auto& v = values_of(f);
    std::vector<double> row;
    row.reserve(keep.size());
    for (auto t : keep) row.push_back(v[t]);
    out.values.push_back(std::move(row));
    out.performers.push_back(perf.performer_id());
    if (out.performers.size() == 1) {
      for (auto t : keep) {
        out.measures.push_back(measures[t]);
        if (const auto* c = std::get_if<ExpressionCurve>(&f)) {
          out.onsets.push_back(c->onsets[t]);
        } else {
          out.onsets.push_back(perf.notes()[t].score_onset);
          out.note_ids.push_back(std::get<NoteWiseFeature>(f).note_ids[t]);
        }
      }
    }
  }
  return out;
}

}  // namespace expeval
