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

#include "expeval/randomizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "expeval/error.hpp"
#include "expeval/parallel.hpp"
#include "expeval/rng.hpp"

namespace expeval {

namespace {

void require_rectangular(const FeatureMatrix& curves, std::size_t min_rows) {
  if (curves.size() < min_rows)
    throw ShapeError("need at least " + std::to_string(min_rows) + " curves, got " + std::to_string(curves.size()));
  const std::size_t d = curves.front().size();
  if (d == 0) throw ShapeError("curves have no dimensions");
  for (const auto& c : curves)
    if (c.size() != d) throw ShapeError("curves differ in dimension");
}

void require_same_onsets(const std::vector<ExpressionCurve>& curves) {
  for (const auto& c : curves)
    if (c.onsets != curves.front().onsets || c.kind != curves.front().kind)
      throw ShapeError("curves differ in kind or onsets");
}

}  // namespace

ValueConstraint constraint_for(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Tempo: return ValueConstraint::Positive;
    case FeatureKind::Velocity: return ValueConstraint::MidiVelocity;
    default: return ValueConstraint::None;
  }
}

FeatureMatrix to_matrix(const std::vector<ExpressionCurve>& curves) {
  FeatureMatrix m;
  m.reserve(curves.size());
  for (const auto& c : curves) m.push_back(c.values);
  return m;
}

std::vector<double> average_curve(const FeatureMatrix& curves) {
  require_rectangular(curves, 1);
  const std::size_t d = curves.front().size();
  std::vector<double> avg(d, 0.0);
  for (std::size_t t = 0; t < d; ++t) {
    const double pivot = curves.front()[t];
    double sum = 0.0;
    for (const auto& c : curves) sum += c[t] - pivot;
    avg[t] = pivot + sum / static_cast<double>(curves.size());
  }
  return avg;
}

ExpressionCurve average_curve(const std::vector<ExpressionCurve>& curves) {
  if (curves.size() < 2) throw ShapeError("average curve needs at least 2 curves");
  require_same_onsets(curves);
  ExpressionCurve out;
  out.kind = curves.front().kind;
  out.onsets = curves.front().onsets;
  out.values = average_curve(to_matrix(curves));
  return out;
}

double average_std(const FeatureMatrix& curves) {
  require_rectangular(curves, 2);
  const auto avg = average_curve(curves);
  double total = 0.0;
  for (std::size_t t = 0; t < avg.size(); ++t) {
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[t] - avg[t]) * (c[t] - avg[t]);
    total += std::sqrt(ss / static_cast<double>(curves.size()));
  }
  return total / static_cast<double>(avg.size());
}

double average_std(const std::vector<ExpressionCurve>& curves) {
  require_same_onsets(curves);
  return average_std(to_matrix(curves));
}

std::vector<double> sample_randomized_values(std::span<const double> avg, const QuantilePartition& partition,
                                             const RandomizationConfig& config, std::size_t index,
                                             ValueConstraint constraint) {
  if (partition.group_of.size() != avg.size()) throw ShapeError("partition does not match the average curve");
  if (!(config.noise_level >= 0.0) || !std::isfinite(config.noise_level))
    throw InvalidArgumentError("noise level must be a finite value >= 0");
  if (config.count < 1) throw InvalidArgumentError("randomization count must be >= 1");
  if (index >= config.count)
    throw InvalidArgumentError("curve index " + std::to_string(index) + " >= count " + std::to_string(config.count));

  const std::size_t d = avg.size();
  std::vector<double> x(d);
  if (config.noise_level == 0.0) {
    for (std::size_t t = 0; t < d; ++t) x[t] = partition.means[partition.group_of[t]];
    return x;
  }
  for (std::size_t t = 0; t < d; ++t) {
    const double mu = partition.means[partition.group_of[t]];
    CounterRng rng(config.seed, index, t);
    std::normal_distribution<double> normal(0.0, 1.0);
    double v = mu + config.noise_level * normal(rng);
    if (constraint == ValueConstraint::Positive) {
      int tries = 0;
      while (!(v > 0.0)) {
        if (++tries > kMaxRejections)
          throw SamplingError("dimension " + std::to_string(t) + ": no positive draw after " +
                              std::to_string(kMaxRejections) + " retries (sigma too large for mean " +
                              std::to_string(mu) + ")");
        v = mu + config.noise_level * normal(rng);
      }
    } else if (constraint == ValueConstraint::MidiVelocity) {
      v = std::clamp(v, 1.0, 127.0);
    }
    x[t] = v;
  }
  return x;
}

ExpressionCurve sample_randomized_curve(const ExpressionCurve& avg, const QuantilePartition& partition,
                                        const RandomizationConfig& config, std::size_t index) {
  ExpressionCurve out;
  out.kind = avg.kind;
  out.onsets = avg.onsets;
  out.values = sample_randomized_values(avg.values, partition, config, index, constraint_for(avg.kind));
  return out;
}

RateEstimator::RateEstimator(FeatureMatrix experts, QuantileScheme scheme, ValueConstraint constraint,
                             StandardizationKind standardization, std::size_t mc_samples, std::uint64_t seed,
                             unsigned threads)
    : experts_(std::move(experts)),
      constraint_(constraint),
      standardization_(standardization),
      mc_samples_(mc_samples),
      random_seed_(derive_seed(seed, "rate/random")),
      threads_(threads) {
  require_rectangular(experts_, 2);
  if (mc_samples_ == 0) throw InvalidArgumentError("mc_samples must be positive");
  average_ = average_curve(experts_);
  partition_ = quantile_partition(average_, scheme);
  sigma_bar_ = average_std(experts_);

  const std::size_t n = experts_.size();
  for (const auto& e : experts_) standardized_.push_back(standardize(e, standardization_));
  expert_error_.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t e = 0; e < n; ++e)
      if (e != r) expert_error_[r][e] = mse(standardized_[e], standardized_[r]);

  const std::uint64_t triplet_seed = derive_seed(seed, "rate/triplets");
  triplets_.resize(mc_samples_);
  for (std::size_t s = 0; s < mc_samples_; ++s) {
    CounterRng rng(triplet_seed, s, 0);
    const std::size_t r = rng.below(n);
    std::size_t e = rng.below(n - 1);
    if (e >= r) ++e;
    triplets_[s] = {r, e};
  }
}

double RateEstimator::rate(double sigma) const {
  const RandomizationConfig config{partition_.scheme, sigma, random_seed_, mc_samples_};
  std::vector<unsigned char> bits(mc_samples_, 0);
  parallel_for(mc_samples_, threads_, [&](std::size_t s) {
    const auto x = standardize(sample_randomized_values(average_, partition_, config, s, constraint_),
                               standardization_);
    const auto [r, e] = triplets_[s];
    bits[s] = expert_error_[r][e] < mse(x, standardized_[r]) ? 1 : 0;
  });
  std::size_t favored = 0;
  for (auto b : bits) favored += b;
  return static_cast<double>(favored) / static_cast<double>(mc_samples_);
}

double identification_rate(const FeatureMatrix& experts, const RandomizationConfig& random,
                           ValueConstraint constraint, StandardizationKind standardization,
                           std::size_t mc_samples, std::uint64_t seed, unsigned threads) {
  RateEstimator est(experts, random.scheme, constraint, standardization, mc_samples,
                    combine(seed, random.seed), threads);
  return est.rate(random.noise_level);
}

double identification_rate(const FeatureMatrix& experts, const FeatureMatrix& pool,
                           StandardizationKind standardization, std::size_t mc_samples, std::uint64_t seed) {
  require_rectangular(experts, 2);
  require_rectangular(pool, 1);
  if (pool.front().size() != experts.front().size()) throw ShapeError("pool and experts differ in dimension");
  if (mc_samples == 0) throw InvalidArgumentError("mc_samples must be positive");
  FeatureMatrix se, sp;
  for (const auto& e : experts) se.push_back(standardize(e, standardization));
  for (const auto& p : pool) sp.push_back(standardize(p, standardization));
  const std::size_t n = experts.size();
  const std::uint64_t key = derive_seed(seed, "rate/pool");
  std::size_t favored = 0;
  for (std::size_t s = 0; s < mc_samples; ++s) {
    CounterRng rng(key, s, 0);
    const std::size_t r = rng.below(n);
    std::size_t e = rng.below(n - 1);
    if (e >= r) ++e;
    const std::size_t j = rng.below(pool.size());
    if (mse(se[e], se[r]) < mse(sp[j], se[r])) ++favored;
  }
  return static_cast<double>(favored) / static_cast<double>(mc_samples);
}

CalibrationResult calibrate_noise_level(const FeatureMatrix& experts, ValueConstraint constraint,
                                        const CalibrationOptions& options) {
  if (!(options.target > 0.0 && options.target < 1.0))
    throw InvalidArgumentError("calibration target must lie in (0,1)");
  if (!(options.tolerance >= 0.0)) throw InvalidArgumentError("tolerance must be >= 0");

  const RateEstimator est(experts, options.scheme, constraint, options.standardization, options.mc_samples,
                          options.seed, options.threads);
  CalibrationResult res;
  res.mc_samples = options.mc_samples;
  res.sigma_bar = est.sigma_bar();

  const double target = options.target;
  const double tol = options.tolerance;
  auto close_enough = [&](double rate) { return std::abs(rate - target) <= tol; };

  res.rate_at_zero = est.rate(0.0);
  if (res.rate_at_zero > target + tol)
    throw CalibrationInfeasible("identification rate at sigma=0 is " + std::to_string(res.rate_at_zero) +
                                ", already above target " + std::to_string(target));
  if (close_enough(res.rate_at_zero)) {
    res.achieved_rate = res.rate_at_zero;
    res.converged = true;
    return res;
  }

  double lo = 0.0, rate_lo = res.rate_at_zero;
  double hi = res.sigma_bar > 0.0 ? res.sigma_bar : 1.0;
  double rate_hi = est.rate(hi);
  for (int doublings = 0; rate_hi < target; ++doublings) {
    if (doublings == 20)
      throw CalibrationInfeasible("identification rate stays below target " + std::to_string(target) +
                                  " up to sigma=" + std::to_string(hi));
    lo = hi;
    rate_lo = rate_hi;
    hi *= 2.0;
    rate_hi = est.rate(hi);
  }
  if (close_enough(rate_hi)) {
    res.sigma = hi;
    res.achieved_rate = rate_hi;
    res.converged = true;
    return res;
  }

  double best_sigma = std::abs(rate_lo - target) < std::abs(rate_hi - target) ? lo : hi;
  double best_rate = best_sigma == lo ? rate_lo : rate_hi;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rate_mid = est.rate(mid);
    res.iterations = it;
    if (rate_mid < rate_lo || rate_mid > rate_hi) res.monotone = false;
    if (std::abs(rate_mid - target) < std::abs(best_rate - target)) {
      best_sigma = mid;
      best_rate = rate_mid;
    }
    if (close_enough(rate_mid)) {
      res.converged = true;
      break;
    }
    if (rate_mid < target) {
      lo = mid;
      rate_lo = rate_mid;
    } else {
      hi = mid;
      rate_hi = rate_mid;
    }
  }
  res.sigma = best_sigma;
  res.achieved_rate = best_rate;
  return res;
}

}  // namespace expeval
