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

// Randomized "unmusical" curves drawn around the average expert curve.
//
// Each dimension t is drawn independently from N(mu_q, sigma^2), where q is the
// quantile group of t in the average curve and mu_q the mean of the average
// curve over that group. Draws are keyed by (seed, curve index, dimension), so
// any subset of curves can be generated in any order with identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "expeval/features.hpp"
#include "expeval/metrics.hpp"

namespace expeval {

/// Performer x dimension.
using FeatureMatrix = std::vector<std::vector<double>>;

enum class ValueConstraint {
  None,
  Positive,      // tempo: redraw until > 0
  MidiVelocity,  // velocity: clip to [1,127]
};

ValueConstraint constraint_for(FeatureKind kind);

struct RandomizationConfig {
  QuantileScheme scheme = QuantileScheme::Tails5_90_5;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::size_t count = 1;
};

inline constexpr int kMaxRejections = 1000;

std::vector<double> average_curve(const FeatureMatrix& curves);
ExpressionCurve average_curve(const std::vector<ExpressionCurve>& curves);

/// Mean over dimensions of the per-dimension population std across performers.
double average_std(const FeatureMatrix& curves);
double average_std(const std::vector<ExpressionCurve>& curves);

FeatureMatrix to_matrix(const std::vector<ExpressionCurve>& curves);

std::vector<double> sample_randomized_values(std::span<const double> avg, const QuantilePartition& partition,
                                             const RandomizationConfig& config, std::size_t index,
                                             ValueConstraint constraint);

ExpressionCurve sample_randomized_curve(const ExpressionCurve& avg, const QuantilePartition& partition,
                                        const RandomizationConfig& config, std::size_t index);

/// Monte-Carlo estimate of how often the two-model comparison favors a test
/// expert over a randomized curve, for a uniformly drawn reference and test
/// expert (test != reference). Curve s of the estimate is random curve index s,
/// so estimates at different noise levels share their random numbers.
class RateEstimator {
 public:
  RateEstimator(FeatureMatrix experts, QuantileScheme scheme, ValueConstraint constraint,
                StandardizationKind standardization, std::size_t mc_samples, std::uint64_t seed,
                unsigned threads = 1);

  double rate(double sigma) const;

  double sigma_bar() const noexcept { return sigma_bar_; }
  const std::vector<double>& average() const noexcept { return average_; }
  const QuantilePartition& partition() const noexcept { return partition_; }
  std::size_t mc_samples() const noexcept { return mc_samples_; }

 private:
  struct Triplet {
    std::size_t reference;
    std::size_t test;
  };

  FeatureMatrix experts_;
  std::vector<double> average_;
  QuantilePartition partition_;
  ValueConstraint constraint_;
  StandardizationKind standardization_;
  std::size_t mc_samples_;
  std::uint64_t random_seed_;
  unsigned threads_;
  double sigma_bar_;
  FeatureMatrix standardized_;
  std::vector<std::vector<double>> expert_error_;  // [reference][test]
  std::vector<Triplet> triplets_;
};

double identification_rate(const FeatureMatrix& experts, const RandomizationConfig& random,
                           ValueConstraint constraint, StandardizationKind standardization,
                           std::size_t mc_samples, std::uint64_t seed, unsigned threads = 1);

/// Same estimate against a fixed pool of candidate curves (drawn uniformly).
double identification_rate(const FeatureMatrix& experts, const FeatureMatrix& pool,
                           StandardizationKind standardization, std::size_t mc_samples, std::uint64_t seed);

struct CalibrationResult {
  double sigma = 0.0;
  double achieved_rate = 0.0;
  int iterations = 0;
  std::size_t mc_samples = 0;
  bool converged = false;
  bool monotone = true;
  double rate_at_zero = 0.0;
  double sigma_bar = 0.0;
};

struct CalibrationOptions {
  QuantileScheme scheme = QuantileScheme::Quartiles;
  double target = 0.5;
  double tolerance = 0.01;
  StandardizationKind standardization = StandardizationKind::StandardScore;
  std::size_t mc_samples = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int max_iterations = 60;
};

/// Bisection over sigma in [0, sigma_hi]; sigma_hi starts at the average expert
/// std and doubles (up to 2^20 times) until the rate reaches the target.
/// Throws CalibrationInfeasible when the rate at sigma = 0 already exceeds
/// target + tolerance, or when no sigma_hi reaches the target.
CalibrationResult calibrate_noise_level(const FeatureMatrix& experts, ValueConstraint constraint,
                                        const CalibrationOptions& options);

}  // namespace expeval
