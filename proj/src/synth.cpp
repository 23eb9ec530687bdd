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

#include "expeval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>

#include "expeval/error.hpp"
#include "expeval/rng.hpp"

namespace expeval {

namespace {

struct ScoreEvent {
  double onset;
  double ioi;
  int measure;
  std::vector<int> pitches;  // ascending; the last one is the melody
  std::vector<double> durations;
};

std::size_t uniform_between(CounterRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

double uniform01(CounterRng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::vector<ScoreEvent> make_score(CounterRng& rng, std::size_t n_onsets) {
  static constexpr double kIois[] = {0.25, 0.5, 0.5, 1.0, 1.0, 1.0, 1.5, 2.0};
  std::vector<ScoreEvent> score;
  double onset = 0.0;
  for (std::size_t k = 0; k < n_onsets; ++k) {
    ScoreEvent ev;
    ev.onset = onset;
    ev.ioi = kIois[rng.below(std::size(kIois))];
    ev.measure = static_cast<int>(std::floor(onset / 4.0)) + 1;
    const double u = uniform01(rng);
    const std::size_t chord = u < 0.5 ? 1 : (u < 0.8 ? 2 : 3);
    std::set<int> pitches;
    while (pitches.size() < chord) pitches.insert(40 + static_cast<int>(rng.below(45)));
    ev.pitches.assign(pitches.begin(), pitches.end());
    for (std::size_t i = 0; i < chord; ++i) ev.durations.push_back(ev.ioi * (rng.below(4) == 0 ? 0.5 : 1.0));
    onset += ev.ioi;
    score.push_back(std::move(ev));
  }
  return score;
}

}  // namespace

SynthPiece synthesize_piece(const SynthOptions& options, std::size_t index) {
  if (options.performers_min < 1 || options.performers_min > options.performers_max)
    throw InvalidArgumentError("invalid performer range");
  if (options.onsets_min < 2 || options.onsets_min > options.onsets_max)
    throw InvalidArgumentError("invalid onset range (minimum 2)");
  if (!(options.dispersion >= 0.0)) throw InvalidArgumentError("dispersion must be >= 0");

  const std::uint64_t key = derive_seed(options.seed, "synth", "", index);
  CounterRng rng(key);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t n_onsets = uniform_between(rng, options.onsets_min, options.onsets_max);
  const std::size_t n_performers = uniform_between(rng, options.performers_min, options.performers_max);
  const double spread = options.dispersion * std::exp(0.4 * normal(rng));
  const auto score = make_score(rng, n_onsets);

  // Shared interpretation.
  const double base_period = 0.35 + 0.5 * uniform01(rng);
  const std::size_t phrase = 6 + static_cast<std::size_t>(rng.below(10));
  std::vector<double> tempo_shape(n_onsets), dynamics(n_onsets), art(n_onsets);
  for (std::size_t k = 0; k < n_onsets; ++k) {
    const double pos = static_cast<double>(k % phrase) / static_cast<double>(phrase);
    tempo_shape[k] = 0.25 * pos * pos - 0.05 * std::sin(2.0 * std::numbers::pi * pos);
    dynamics[k] = 64.0 + 18.0 * std::sin(std::numbers::pi * pos) + 4.0 * normal(rng);
    art[k] = -0.3 + 0.3 * normal(rng);
  }

  SynthPiece piece;
  char id[32];
  std::snprintf(id, sizeof id, "piece_%02zu", index + 1);
  piece.piece_id = id;
  piece.composer = "Synthetic";

  for (std::size_t p = 0; p < n_performers; ++p) {
    CounterRng prng(key, p + 1, 0);
    const double global = std::exp(0.1 * normal(prng));
    const double emphasis = 1.0 + 0.3 * spread * normal(prng);
    const double loudness = 6.0 * normal(prng);
    const double dyn_scale = 1.0 + 0.25 * spread * normal(prng);
    const double art_offset = 0.15 * normal(prng);

    std::vector<double> period(n_onsets);
    double smooth = 0.0;
    for (std::size_t k = 0; k < n_onsets; ++k) {
      smooth = 0.8 * smooth + 0.03 * spread * normal(prng);
      period[k] = base_period * global * std::exp(emphasis * tempo_shape[k] + smooth + 0.03 * spread * normal(prng));
    }

    std::vector<AlignedNote> notes;
    double mean_onset = 0.5 + uniform01(prng);
    double dyn_smooth = 0.0;
    for (std::size_t k = 0; k < n_onsets; ++k) {
      const auto& ev = score[k];
      const double bp = period[std::min(k, n_onsets - 2)];
      dyn_smooth = 0.7 * dyn_smooth + 2.0 * spread * normal(prng);
      const double level = 64.0 + dyn_scale * (dynamics[k] - 64.0) + loudness + dyn_smooth;

      const std::size_t chord = ev.pitches.size();
      std::vector<double> async(chord);
      for (std::size_t i = 0; i < chord; ++i)
        async[i] = (i + 1 == chord ? -0.008 : 0.0) + 0.006 * spread * normal(prng);
      double async_mean = 0.0;
      for (double a : async) async_mean += a;
      async_mean /= static_cast<double>(chord);

      for (std::size_t i = 0; i < chord; ++i) {
        AlignedNote n;
        char nid[48];
        std::snprintf(nid, sizeof nid, "n%zu_%zu", k + 1, i + 1);
        n.note_id = nid;
        n.pitch = ev.pitches[i];
        n.measure = ev.measure;
        n.score_onset = ev.onset;
        n.score_duration = ev.durations[i];
        n.perf_onset = chord == 1 ? mean_onset : mean_onset + async[i] - async_mean;
        const double a = art[k] + art_offset + 0.2 * spread * normal(prng);
        n.perf_duration = std::exp2(a) * n.score_duration * bp;
        const double v = level + (i + 1 == chord ? 8.0 : -4.0) + 3.0 * normal(prng);
        n.velocity = static_cast<int>(std::clamp(std::lround(v), 1L, 127L));
        notes.push_back(std::move(n));
      }
      mean_onset += period[k] * ev.ioi;
    }
    char pid[32];
    std::snprintf(pid, sizeof pid, "p%02zu", p + 1);
    piece.performances.push_back(PerformanceRecord::create(pid, piece.piece_id, std::move(notes)));
  }
  return piece;
}

std::vector<SynthPiece> synthesize_corpus(const SynthOptions& options) {
  std::vector<SynthPiece> out;
  out.reserve(options.pieces);
  for (std::size_t i = 0; i < options.pieces; ++i) out.push_back(synthesize_piece(options, i));
  return out;
}

void write_synthetic_corpus(const std::vector<SynthPiece>& pieces, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create '" + root.string() + "': " + ec.message());
  for (const auto& piece : pieces) {
    const fs::path dir = root / piece.piece_id;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    for (const auto& perf : piece.performances)
      write_text_file(dir / (perf.performer_id() + std::string(kPerfalignExtension)), write_performance(perf));
    if (!piece.composer.empty()) write_text_file(dir / "composer.txt", piece.composer + "\n");
  }
}

}  // namespace expeval
