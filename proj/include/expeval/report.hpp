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

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "expeval/evaluation.hpp"
#include "expeval/features.hpp"
#include "expeval/metrics.hpp"

namespace expeval {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

struct RandomizationInfo {
  QuantileScheme scheme;
  double sigma;
  std::uint64_t seed;
  std::size_t index;
};

/// Onset-wise: {piece_id, performer_id, kind, onsets[], values[]}
/// Note-wise:  {piece_id, performer_id, kind, entries{note_id: value}}
/// plus an optional `randomization` block {scheme, sigma, seed, index}.
Json feature_to_json(const Feature& feature, const std::string& piece_id, const std::string& performer_id,
                     const std::optional<RandomizationInfo>& randomization = std::nullopt);

/// Throws InvalidArgumentError on malformed documents.
Feature feature_from_json(const Json& doc);

/// Per-piece summary TSV for one standardization, with `#` config header lines.
std::string grid_report_tsv(const GridResult& grid, StandardizationKind standardization);

Json grid_report_json(const GridResult& grid);

}  // namespace expeval
