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

// Shared builders for the unit and property tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "expeval/perfalign.hpp"

namespace testsupport {

inline expeval::AlignedNote note(std::string id, int pitch, int measure, double score_onset, double score_dur,
                                 double perf_onset, double perf_dur, int velocity) {
  expeval::AlignedNote n;
  n.note_id = std::move(id);
  n.pitch = pitch;
  n.measure = measure;
  n.score_onset = score_onset;
  n.score_duration = score_dur;
  n.perf_onset = perf_onset;
  n.perf_duration = perf_dur;
  n.velocity = velocity;
  return n;
}

inline expeval::PerformanceRecord record(std::vector<expeval::AlignedNote> notes, std::string performer = "p",
                                         std::string piece = "piece") {
  return expeval::PerformanceRecord::create(std::move(performer), std::move(piece), std::move(notes));
}

struct ScoreEvent {
  double onset;
  int measure;
  std::vector<int> pitches;
  std::vector<double> durations;
};

// A random score: `onsets` distinct onsets on an eighth-note lattice, chords of
// one to four notes, four beats per measure.
inline std::vector<ScoreEvent> random_score(std::mt19937_64& rng, std::size_t onsets) {
  std::uniform_int_distribution<int> step(1, 4), chord(1, 4), pitch(36, 96), dur(1, 8);
  std::vector<ScoreEvent> score;
  double t = 0.0;
  for (std::size_t k = 0; k < onsets; ++k) {
    ScoreEvent ev{t, 1 + static_cast<int>(t / 4.0), {}, {}};
    const int c = chord(rng);
    for (int i = 0; i < c; ++i) {
      int p = pitch(rng);
      while (std::find(ev.pitches.begin(), ev.pitches.end(), p) != ev.pitches.end()) p = pitch(rng);
      ev.pitches.push_back(p);
      ev.durations.push_back(0.5 * dur(rng));
    }
    score.push_back(ev);
    t += 0.5 * step(rng);
  }
  return score;
}

// One performance of `score`: drifting beat period, chord asynchrony, legato
// variation and velocities that sometimes touch the MIDI bounds.
inline expeval::PerformanceRecord random_performance(std::mt19937_64& rng, const std::vector<ScoreEvent>& score,
                                                     const std::string& performer, const std::string& piece = "piece") {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> vel(1, 127);
  std::vector<expeval::AlignedNote> notes;
  double bp = 0.5 + 0.1 * std::abs(z(rng));
  double time = 0.2 * std::abs(z(rng));
  for (std::size_t k = 0; k < score.size(); ++k) {
    const auto& ev = score[k];
    for (std::size_t i = 0; i < ev.pitches.size(); ++i) {
      const double async = 0.01 * z(rng);
      const double dur = ev.durations[i] * bp * std::exp2(0.3 * z(rng));
      notes.push_back(note("n" + std::to_string(k) + "_" + std::to_string(i), ev.pitches[i], ev.measure, ev.onset,
                           ev.durations[i], time + async, dur, vel(rng)));
    }
    if (k + 1 < score.size()) {
      bp = std::clamp(bp * std::exp(0.05 * z(rng)), 0.2, 2.0);
      time += bp * (score[k + 1].onset - ev.onset);
    }
  }
  std::shuffle(notes.begin(), notes.end(), rng);
  return record(std::move(notes), performer, piece);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t d, double scale = 1.0,
                                         double offset = 0.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = offset + scale * z(rng);
  return v;
}

}  // namespace testsupport
