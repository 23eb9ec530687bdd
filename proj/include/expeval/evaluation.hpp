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

// Two-model evaluation of expert versus randomized curves, and the
// reliability / validity statistics derived from it.
//
// For a reference expert r, a test expert e != r and a random curve j, the
// comparison yields 1 when e has the strictly smaller MSE to r (the expert is
// favored) and 0 otherwise, ties included.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "expeval/features.hpp"
#include "expeval/metrics.hpp"
#include "expeval/perfalign.hpp"
#include "expeval/randomizer.hpp"

namespace expeval {

bool two_model_compare(std::span<const double> p1, std::span<const double> p2, std::span<const double> rp,
                       StandardizationKind standardization);

inline constexpr std::int8_t kUndefinedBit = -1;

/// Rows are references, columns (test expert e, random j) at e * randoms + j.
/// Entries with e == reference are undefined.
struct OutcomeMatrix {
  std::size_t experts = 0;
  std::size_t randoms = 0;
  std::vector<std::int8_t> bits;

  std::size_t columns() const noexcept { return experts * randoms; }
  std::int8_t at(std::size_t reference, std::size_t test, std::size_t random) const {
    return bits[reference * columns() + test * randoms + random];
  }
  std::size_t defined_count() const;
  std::size_t favored_count() const;
};

OutcomeMatrix outcome_matrix(const FeatureMatrix& experts, const FeatureMatrix& randoms,
                             StandardizationKind standardization);

/// Mean over unordered reference pairs of the correlation of their outcome
/// vectors, restricted to columns whose test expert is neither reference.
/// Pearson when both restricted vectors vary, else 2 * agreement - 1.
double reliability(const OutcomeMatrix& m);

/// Fraction of defined comparisons that favor the random curve.
double validity_error(const OutcomeMatrix& m);

struct PieceStatistics {
  std::size_t n_experts = 0;
  std::size_t n_randoms = 0;
  std::size_t dims = 0;
  std::size_t defined_bits = 0;
  double mean_mse_expert_expert = 0.0;
  double mean_mse_expert_random = 0.0;
  double mean_mse_random_random = 0.0;  // NaN with fewer than 2 randoms
  double reliability = 0.0;
  double validity_error = 0.0;
};

PieceStatistics piece_statistics(const FeatureMatrix& experts, const FeatureMatrix& randoms,
                                 StandardizationKind standardization);

struct PieceReport {
  std::string piece_id;
  std::string composer;
  FeatureKind feature = FeatureKind::Tempo;
  StandardizationKind standardization = StandardizationKind::StandardScore;
  std::size_t n_onsets = 0;
  PieceStatistics stats;
};

struct DatasetReport {
  FeatureKind feature = FeatureKind::Tempo;
  StandardizationKind standardization = StandardizationKind::StandardScore;
  std::vector<PieceReport> per_piece;
  /// Unweighted means of the per-piece statistics; counts are summed.
  PieceStatistics aggregate;
  std::size_t total_onsets = 0;
};

PieceStatistics aggregate_statistics(const std::vector<PieceReport>& pieces);

struct ExcerptScore {
  int start_measure = 0;
  int length = 0;
  double mean_correlation = 0.0;
  std::size_t onsets = 0;
  std::size_t pairs = 0;
};

/// Every window of `window_measures` consecutive measures (stride 1) with at
/// least `min_onsets` grid onsets, ranked by mean pairwise Pearson correlation
/// of the performers' curves inside the window (descending).
std::vector<ExcerptScore> excerpt_scan(const PieceCorpus& corpus, FeatureKind kind, int window_measures,
                                       std::size_t min_onsets);

struct GridOptions {
  std::vector<FeatureKind> features{FeatureKind::Velocity, FeatureKind::Tempo};
  std::vector<StandardizationKind> standardizations{std::begin(kAllStandardizations),
                                                    std::end(kAllStandardizations)};
  std::size_t randoms_per_piece = 64;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct GridFailure {
  std::string piece_id;
  std::string feature;          // empty when the whole piece failed
  std::string standardization;  // empty when all standardizations failed
  std::string message;
};

struct GridResult {
  GridOptions options;
  std::vector<DatasetReport> reports;  // feature-major, then standardization
  std::vector<GridFailure> failures;
  std::size_t pieces = 0;
  /// features x standardizations x 2 tests (reliability, validity) x pieces
  std::size_t experiment_cells = 0;
  std::size_t failed_cells = 0;

  const DatasetReport& report(FeatureKind feature, StandardizationKind standardization) const;
};

inline constexpr std::size_t kTestsPerCell = 2;

/// For each (feature, piece): randoms_per_piece curves from the tail scheme at
/// sigma = average expert std, shared across standardizations. Per-piece
/// failures are recorded, never thrown. Output is independent of `threads`.
GridResult run_experiment_grid(const std::vector<PieceCorpus>& corpora, const GridOptions& options);

/// Randomized curves used by the grid for one (feature, piece).
FeatureMatrix grid_randoms(const FeatureMatrix& experts, FeatureKind kind, const std::string& piece_id,
                           std::size_t count, std::uint64_t seed);

}  // namespace expeval
