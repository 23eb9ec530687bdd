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

// Deterministic synthetic corpora of score-aligned performances.
//
// Each piece has a random score (1-3 note chords on a beat grid, 4/4 bars)
// and a shared interpretation: phrase-arched tempo and dynamics, a melody
// lead in timing and loudness, and per-onset articulation. Every performer
// deviates from the shared interpretation by an individual global tempo,
// a scaled phrase emphasis and smooth plus white noise, all proportional to
// `dispersion`.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "expeval/perfalign.hpp"

namespace expeval {

struct SynthOptions {
  std::size_t pieces = 33;
  std::size_t performers_min = 6;
  std::size_t performers_max = 34;
  std::size_t onsets_min = 40;
  std::size_t onsets_max = 120;
  double dispersion = 1.0;
  std::uint64_t seed = 0;
};

struct SynthPiece {
  std::string piece_id;
  std::string composer;
  std::vector<PerformanceRecord> performances;
};

SynthPiece synthesize_piece(const SynthOptions& options, std::size_t index);
std::vector<SynthPiece> synthesize_corpus(const SynthOptions& options);

/// One directory per piece under `root`, one perfalign file per performer.
void write_synthetic_corpus(const std::vector<SynthPiece>& pieces, const std::filesystem::path& root);

}  // namespace expeval
