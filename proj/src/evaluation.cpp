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

#include "expeval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "expeval/error.hpp"
#include "expeval/parallel.hpp"
#include "expeval/rng.hpp"

namespace expeval {

namespace {

FeatureMatrix standardize_all(const FeatureMatrix& curves, StandardizationKind kind) {
  FeatureMatrix out;
  out.reserve(curves.size());
  for (const auto& c : curves) out.push_back(standardize(c, kind));
  return out;
}

void require_shapes(const FeatureMatrix& experts, const FeatureMatrix& randoms) {
  if (experts.size() < 3)
    throw TooFewPerformancesError("need at least 3 expert performances, got " + std::to_string(experts.size()));
  if (randoms.empty()) throw InvalidArgumentError("need at least 1 random curve");
  const std::size_t d = experts.front().size();
  for (const auto& c : experts)
    if (c.size() != d) throw ShapeError("expert curves differ in dimension");
  for (const auto& c : randoms)
    if (c.size() != d) throw ShapeError("random curves differ in dimension from the experts");
}

// Inputs already standardized.
OutcomeMatrix build_matrix(const FeatureMatrix& experts, const FeatureMatrix& randoms) {
  const std::size_t n = experts.size();
  const std::size_t m = randoms.size();
  OutcomeMatrix out;
  out.experts = n;
  out.randoms = m;
  out.bits.assign(n * n * m, kUndefinedBit);
  std::vector<double> random_error(m);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < m; ++j) random_error[j] = mse(randoms[j], experts[r]);
    for (std::size_t e = 0; e < n; ++e) {
      if (e == r) continue;
      const double expert_error = mse(experts[e], experts[r]);
      auto* row = &out.bits[r * n * m + e * m];
      for (std::size_t j = 0; j < m; ++j) row[j] = expert_error < random_error[j] ? 1 : 0;
    }
  }
  return out;
}

double mean_pairwise_mse(const FeatureMatrix& a) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j, ++count) sum += mse(a[i], a[j]);
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

bool two_model_compare(std::span<const double> p1, std::span<const double> p2, std::span<const double> rp,
                       StandardizationKind standardization) {
  const auto s1 = standardize(p1, standardization);
  const auto s2 = standardize(p2, standardization);
  const auto sr = standardize(rp, standardization);
  return mse(s1, sr) < mse(s2, sr);
}

std::size_t OutcomeMatrix::defined_count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != kUndefinedBit; }));
}

std::size_t OutcomeMatrix::favored_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::int8_t{1}));
}

OutcomeMatrix outcome_matrix(const FeatureMatrix& experts, const FeatureMatrix& randoms,
                             StandardizationKind standardization) {
  require_shapes(experts, randoms);
  return build_matrix(standardize_all(experts, standardization), standardize_all(randoms, standardization));
}

double reliability(const OutcomeMatrix& m) {
  if (m.experts < 2) throw UndefinedReliability("reliability needs at least 2 references");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t r1 = 0; r1 < m.experts; ++r1) {
    for (std::size_t r2 = r1 + 1; r2 < m.experts; ++r2) {
      std::int64_t n = 0, sx = 0, sy = 0, sxy = 0, agree = 0;
      for (std::size_t e = 0; e < m.experts; ++e) {
        if (e == r1 || e == r2) continue;
        for (std::size_t j = 0; j < m.randoms; ++j) {
          const int x = m.at(r1, e, j);
          const int y = m.at(r2, e, j);
          ++n;
          sx += x;
          sy += y;
          sxy += x * y;
          agree += x == y;
        }
      }
      if (n == 0) continue;
      const bool x_varies = sx > 0 && sx < n;
      const bool y_varies = sy > 0 && sy < n;
      if (x_varies && y_varies) {
        const double num = static_cast<double>(n * sxy - sx * sy);
        const double den = std::sqrt(static_cast<double>(sx * (n - sx))) * std::sqrt(static_cast<double>(sy * (n - sy)));
        sum += std::clamp(num / den, -1.0, 1.0);
      } else {
        sum += 2.0 * static_cast<double>(agree) / static_cast<double>(n) - 1.0;
      }
      ++pairs;
    }
  }
  if (pairs == 0) throw UndefinedReliability("no pair of references shares a test column");
  return sum / static_cast<double>(pairs);
}

double validity_error(const OutcomeMatrix& m) {
  const std::size_t defined = m.defined_count();
  if (defined == 0) throw InvalidArgumentError("outcome matrix has no defined comparisons");
  return static_cast<double>(defined - m.favored_count()) / static_cast<double>(defined);
}

PieceStatistics piece_statistics(const FeatureMatrix& experts, const FeatureMatrix& randoms,
                                 StandardizationKind standardization) {
  require_shapes(experts, randoms);
  const auto se = standardize_all(experts, standardization);
  const auto sr = standardize_all(randoms, standardization);

  PieceStatistics s;
  s.n_experts = experts.size();
  s.n_randoms = randoms.size();
  s.dims = experts.front().size();
  s.mean_mse_expert_expert = mean_pairwise_mse(se);
  s.mean_mse_random_random = mean_pairwise_mse(sr);
  double cross = 0.0;
  for (const auto& e : se)
    for (const auto& r : sr) cross += mse(e, r);
  s.mean_mse_expert_random = cross / static_cast<double>(se.size() * sr.size());

  const auto matrix = build_matrix(se, sr);
  s.defined_bits = matrix.defined_count();
  s.reliability = reliability(matrix);
  s.validity_error = validity_error(matrix);
  return s;
}

PieceStatistics aggregate_statistics(const std::vector<PieceReport>& pieces) {
  PieceStatistics a;
  if (pieces.empty()) return a;
  std::size_t rr_count = 0;
  for (const auto& p : pieces) {
    a.n_experts += p.stats.n_experts;
    a.n_randoms += p.stats.n_randoms;
    a.dims += p.stats.dims;
    a.defined_bits += p.stats.defined_bits;
    a.mean_mse_expert_expert += p.stats.mean_mse_expert_expert;
    a.mean_mse_expert_random += p.stats.mean_mse_expert_random;
    if (!std::isnan(p.stats.mean_mse_random_random)) {
      a.mean_mse_random_random += p.stats.mean_mse_random_random;
      ++rr_count;
    }
    a.reliability += p.stats.reliability;
    a.validity_error += p.stats.validity_error;
  }
  const double n = static_cast<double>(pieces.size());
  a.mean_mse_expert_expert /= n;
  a.mean_mse_expert_random /= n;
  a.mean_mse_random_random =
      rr_count ? a.mean_mse_random_random / static_cast<double>(rr_count) : std::numeric_limits<double>::quiet_NaN();
  a.reliability /= n;
  a.validity_error /= n;
  return a;
}

std::vector<ExcerptScore> excerpt_scan(const PieceCorpus& corpus, FeatureKind kind, int window_measures,
                                       std::size_t min_onsets) {
  if (window_measures < 1) throw InvalidArgumentError("window must span at least 1 measure");
  if (corpus.size() < 2) throw CorpusTooSmallError("excerpt scan needs at least 2 performances");

  const auto features = corpus_features(corpus, kind);
  const auto groups = group_by_onset(corpus.performances().front());
  const auto [lo_it, hi_it] = std::minmax_element(groups.measure.begin(), groups.measure.end());
  const int first_measure = *lo_it;
  const int last_measure = *hi_it;

  std::vector<ExcerptScore> out;
  for (int start = first_measure; start + window_measures - 1 <= last_measure; ++start) {
    const int end = start + window_measures - 1;
    const auto onsets = static_cast<std::size_t>(std::count_if(
        groups.measure.begin(), groups.measure.end(), [&](int m) { return m >= start && m <= end; }));
    if (onsets < min_onsets) continue;

    std::vector<std::size_t> dims;
    for (std::size_t t = 0; t < features.dim(); ++t)
      if (features.measures[t] >= start && features.measures[t] <= end) dims.push_back(t);
    if (dims.size() < 2) continue;

    FeatureMatrix window;
    for (const auto& row : features.values) {
      std::vector<double> w;
      w.reserve(dims.size());
      for (auto t : dims) w.push_back(row[t]);
      window.push_back(std::move(w));
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < window.size(); ++a) {
      if (is_constant(window[a])) continue;
      for (std::size_t b = a + 1; b < window.size(); ++b) {
        if (is_constant(window[b])) continue;
        sum += pearson(window[a], window[b]);
        ++pairs;
      }
    }
    if (pairs == 0) continue;
    out.push_back({start, window_measures, sum / static_cast<double>(pairs), onsets, pairs});
  }
  if (out.empty()) throw NoExcerptError("no window of " + std::to_string(window_measures) +
                                        " measures with at least " + std::to_string(min_onsets) + " onsets");
  std::stable_sort(out.begin(), out.end(),
                   [](const ExcerptScore& a, const ExcerptScore& b) { return a.mean_correlation > b.mean_correlation; });
  return out;
}

FeatureMatrix grid_randoms(const FeatureMatrix& experts, FeatureKind kind, const std::string& piece_id,
                           std::size_t count, std::uint64_t seed) {
  const auto avg = average_curve(experts);
  const auto partition = quantile_partition(avg, QuantileScheme::Tails5_90_5);
  const RandomizationConfig config{QuantileScheme::Tails5_90_5, average_std(experts),
                                   derive_seed(seed, "evaluate", piece_id, static_cast<std::uint64_t>(kind)), count};
  FeatureMatrix out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j)
    out.push_back(sample_randomized_values(avg, partition, config, j, constraint_for(kind)));
  return out;
}

const DatasetReport& GridResult::report(FeatureKind feature, StandardizationKind standardization) const {
  for (const auto& r : reports)
    if (r.feature == feature && r.standardization == standardization) return r;
  throw InvalidArgumentError("no report for " + std::string(to_string(feature)) + "/" +
                             std::string(to_string(standardization)));
}

GridResult run_experiment_grid(const std::vector<PieceCorpus>& corpora, const GridOptions& options) {
  if (options.features.empty() || options.standardizations.empty())
    throw InvalidArgumentError("grid needs at least one feature and one standardization");
  if (options.randoms_per_piece < 1) throw InvalidArgumentError("randoms_per_piece must be >= 1");

  std::vector<std::size_t> order(corpora.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corpora[a].piece_id() < corpora[b].piece_id(); });

  const std::size_t nf = options.features.size();
  const std::size_t ns = options.standardizations.size();
  const std::size_t np = corpora.size();

  struct Cell {
    std::optional<PieceStatistics> stats;
    std::string error;
  };
  struct Task {
    std::vector<Cell> cells;  // per standardization
    std::string error;        // whole (feature, piece) failed
  };
  std::vector<Task> tasks(nf * np);

  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    const FeatureKind kind = options.features[i / np];
    const PieceCorpus& corpus = corpora[order[i % np]];
    Task& task = tasks[i];
    task.cells.resize(ns);
    try {
      if (corpus.size() < 3)
        throw TooFewPerformancesError("need at least 3 expert performances, got " + std::to_string(corpus.size()));
      const auto experts = corpus_features(corpus, kind).values;
      const auto randoms = grid_randoms(experts, kind, corpus.piece_id(), options.randoms_per_piece, options.seed);
      for (std::size_t s = 0; s < ns; ++s) {
        try {
          task.cells[s].stats = piece_statistics(experts, randoms, options.standardizations[s]);
        } catch (const std::exception& e) {
          task.cells[s].error = e.what();
        }
      }
    } catch (const std::exception& e) {
      task.error = e.what();
    }
  });

  GridResult result;
  result.options = options;
  result.pieces = np;
  result.experiment_cells = nf * ns * kTestsPerCell * np;
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t s = 0; s < ns; ++s) {
      DatasetReport report;
      report.feature = options.features[f];
      report.standardization = options.standardizations[s];
      for (std::size_t p = 0; p < np; ++p) {
        const PieceCorpus& corpus = corpora[order[p]];
        const Task& task = tasks[f * np + p];
        const Cell& cell = task.cells[s];
        if (!task.error.empty() || !cell.stats) {
          result.failed_cells += kTestsPerCell;
          if (!task.error.empty()) {
            if (s == 0)
              result.failures.push_back({corpus.piece_id(), std::string(to_string(report.feature)), "", task.error});
          } else {
            result.failures.push_back({corpus.piece_id(), std::string(to_string(report.feature)),
                                       std::string(to_string(report.standardization)), cell.error});
          }
          continue;
        }
        PieceReport pr;
        pr.piece_id = corpus.piece_id();
        pr.composer = corpus.composer();
        pr.feature = report.feature;
        pr.standardization = report.standardization;
        pr.n_onsets = corpus.onset_grid().size();
        pr.stats = *cell.stats;
        report.total_onsets += pr.n_onsets;
        report.per_piece.push_back(std::move(pr));
      }
      report.aggregate = aggregate_statistics(report.per_piece);
      result.reports.push_back(std::move(report));
    }
  }
  return result;
}

}  // namespace expeval
