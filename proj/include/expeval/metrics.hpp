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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expeval/features.hpp"

namespace expeval {

enum class StandardizationKind { None, Mean, MeanLog, StandardScore };

inline constexpr StandardizationKind kAllStandardizations[] = {
    StandardizationKind::None, StandardizationKind::Mean, StandardizationKind::MeanLog,
    StandardizationKind::StandardScore};

std::string_view to_string(StandardizationKind kind);
StandardizationKind parse_standardization(std::string_view name);

/// none: x; mean: x - mean(x); mean_log: log2(x) - mean(log2(x));
/// standard_score: (x - mean(x)) / population_std(x).
std::vector<double> standardize(std::span<const double> values, StandardizationKind kind);
ExpressionCurve standardize(const ExpressionCurve& curve, StandardizationKind kind);

double mean(std::span<const double> values);
double population_std(std::span<const double> values);
bool is_constant(std::span<const double> values);

/// (1/d) * sum (a_t - b_t)^2
double mse(std::span<const double> a, std::span<const double> b);
double mse(const ExpressionCurve& a, const ExpressionCurve& b);

double pearson(std::span<const double> a, std::span<const double> b);
double pearson(const ExpressionCurve& a, const ExpressionCurve& b);

/// C(n,k) / 2^n, evaluated in log space.
double binomial_exact_probability(long n, long k);

enum class QuantileScheme { Quartiles, Tails5_90_5 };

std::string_view to_string(QuantileScheme scheme);
QuantileScheme parse_quantile_scheme(std::string_view name);

/// Dimensions grouped by the rank of their value. Groups are numbered in
/// ascending value order: quartiles Q1..Q4, or bottom/center/top for the tail
/// scheme.
struct QuantilePartition {
  QuantileScheme scheme = QuantileScheme::Quartiles;
  std::vector<std::size_t> group_of;
  std::vector<double> means;
  std::vector<std::size_t> sizes;
  std::string boundaries;

  std::size_t groups() const noexcept { return means.size(); }
};

std::size_t group_count(QuantileScheme scheme);

/// Quartiles: four rank-contiguous groups, the remainder of d/4 going to the
/// lowest groups. Tails: the top and bottom floor(d/20) ranks (at least one
/// each), the rest in the center. Ties keep input index order.
QuantilePartition quantile_partition(std::span<const double> avg, QuantileScheme scheme);

}  // namespace expeval
