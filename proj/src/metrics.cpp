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

#include "expeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "expeval/error.hpp"

namespace expeval {

std::string_view to_string(StandardizationKind kind) {
  switch (kind) {
    case StandardizationKind::None: return "none";
    case StandardizationKind::Mean: return "mean";
    case StandardizationKind::MeanLog: return "mean_log";
    case StandardizationKind::StandardScore: return "standard_score";
  }
  return "unknown";
}

StandardizationKind parse_standardization(std::string_view name) {
  for (auto k : kAllStandardizations)
    if (name == to_string(k)) return k;
  throw InvalidArgumentError("unknown standardization '" + std::string(name) + "'");
}

double mean(std::span<const double> values) {
  if (values.empty()) throw ShapeError("mean of an empty curve");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

bool is_constant(std::span<const double> values) {
  return std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end();
}

std::vector<double> standardize(std::span<const double> values, StandardizationKind kind) {
  if (values.empty()) throw ShapeError("cannot standardize an empty curve");
  std::vector<double> out(values.begin(), values.end());
  switch (kind) {
    case StandardizationKind::None:
      break;
    case StandardizationKind::Mean: {
      const double m = mean(values);
      for (auto& v : out) v -= m;
      break;
    }
    case StandardizationKind::MeanLog: {
      for (auto& v : out) {
        if (!(v > 0.0)) throw DomainError("mean_log standardization needs strictly positive values");
        v = std::log2(v);
      }
      const double m = mean(out);
      for (auto& v : out) v -= m;
      break;
    }
    case StandardizationKind::StandardScore: {
      if (is_constant(values)) throw ConstantCurveError("standard score of a constant curve");
      const double m = mean(values);
      const double s = population_std(values);
      for (auto& v : out) v = (v - m) / s;
      break;
    }
  }
  return out;
}

ExpressionCurve standardize(const ExpressionCurve& curve, StandardizationKind kind) {
  ExpressionCurve out = curve;
  out.values = standardize(curve.values, kind);
  return out;
}

namespace {
void require_same_shape(const ExpressionCurve& a, const ExpressionCurve& b) {
  if (a.dim() != b.dim() || a.onsets != b.onsets)
    throw ShapeError("curves differ in dimension or onsets");
}
}  // namespace

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("mse of curves with different dimension");
  if (a.empty()) throw ShapeError("mse of empty curves");
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double diff = a[t] - b[t];
    sum += diff * diff;
  }
  return sum / static_cast<double>(a.size());
}

double mse(const ExpressionCurve& a, const ExpressionCurve& b) {
  require_same_shape(a, b);
  return mse(a.values, b.values);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("pearson of curves with different dimension");
  if (a.size() < 2) throw ShapeError("pearson needs at least 2 dimensions");
  if (is_constant(a) || is_constant(b)) throw ConstantCurveError("pearson of a constant curve");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double da = a[t] - ma;
    const double db = b[t] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double pearson(const ExpressionCurve& a, const ExpressionCurve& b) {
  require_same_shape(a, b);
  return pearson(a.values, b.values);
}

double binomial_exact_probability(long n, long k) {
  if (n < 1) throw DomainError("binomial needs n >= 1");
  if (k < 0 || k > n) throw DomainError("binomial k=" + std::to_string(k) + " outside [0," + std::to_string(n) + "]");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double log_p = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) -
                       nd * std::log(2.0);
  return std::exp(log_p);
}

std::string_view to_string(QuantileScheme scheme) {
  return scheme == QuantileScheme::Quartiles ? "quartiles" : "tails_5_90_5";
}

QuantileScheme parse_quantile_scheme(std::string_view name) {
  if (name == "quartiles") return QuantileScheme::Quartiles;
  if (name == "tails_5_90_5" || name == "tails") return QuantileScheme::Tails5_90_5;
  throw InvalidArgumentError("unknown quantile scheme '" + std::string(name) + "'");
}

std::size_t group_count(QuantileScheme scheme) { return scheme == QuantileScheme::Quartiles ? 4 : 3; }

QuantilePartition quantile_partition(std::span<const double> avg, QuantileScheme scheme) {
  const std::size_t d = avg.size();
  const std::size_t groups = group_count(scheme);
  if (d < groups)
    throw TooFewDimensionsError("quantile partition needs at least " + std::to_string(groups) +
                                " dimensions, got " + std::to_string(d));
  for (double v : avg)
    if (!std::isfinite(v)) throw DomainError("average curve contains non-finite values");

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return avg[a] < avg[b]; });

  QuantilePartition p;
  p.scheme = scheme;
  if (scheme == QuantileScheme::Quartiles) {
    const std::size_t base = d / 4;
    const std::size_t rem = d % 4;
    for (std::size_t q = 0; q < 4; ++q) p.sizes.push_back(base + (q < rem ? 1 : 0));
    p.boundaries = "quartiles by rank; remainder to lower groups";
  } else {
    const std::size_t tail = std::max<std::size_t>(1, d / 20);
    p.sizes = {tail, d - 2 * tail, tail};
    p.boundaries = "bottom 5% / center 90% / top 5% by rank (tails at least 1)";
  }

  p.group_of.assign(d, 0);
  p.means.assign(groups, 0.0);
  std::size_t rank = 0;
  for (std::size_t q = 0; q < groups; ++q) {
    // Accumulate offsets from the group's first value so constant groups are exact.
    const double pivot = avg[order[rank]];
    double sum = 0.0;
    for (std::size_t i = 0; i < p.sizes[q]; ++i, ++rank) {
      p.group_of[order[rank]] = q;
      sum += avg[order[rank]] - pivot;
    }
    p.means[q] = pivot + sum / static_cast<double>(p.sizes[q]);
  }
  return p;
}

}  // namespace expeval
