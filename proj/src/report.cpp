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

#include "expeval/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "expeval/error.hpp"

namespace expeval {

namespace {

Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.0") s.erase(0, 1);
  return s;
}

Json stats_json(const PieceStatistics& s) {
  Json j;
  j["n_experts"] = s.n_experts;
  j["n_randoms"] = s.n_randoms;
  j["dims"] = s.dims;
  j["defined_bits"] = s.defined_bits;
  j["mean_mse_expert_expert"] = number_or_null(s.mean_mse_expert_expert);
  j["mean_mse_expert_random"] = number_or_null(s.mean_mse_expert_random);
  j["mean_mse_random_random"] = number_or_null(s.mean_mse_random_random);
  j["reliability"] = number_or_null(s.reliability);
  j["validity_error"] = number_or_null(s.validity_error);
  return j;
}

std::string join_features(const std::vector<FeatureKind>& kinds) {
  std::string out;
  for (auto k : kinds) {
    if (!out.empty()) out += ',';
    out += to_string(k);
  }
  return out;
}

}  // namespace

Json feature_to_json(const Feature& feature, const std::string& piece_id, const std::string& performer_id,
                     const std::optional<RandomizationInfo>& randomization) {
  Json j;
  j["piece_id"] = piece_id;
  j["performer_id"] = performer_id;
  j["kind"] = std::string(to_string(kind_of(feature)));
  if (const auto* c = std::get_if<ExpressionCurve>(&feature)) {
    j["onsets"] = c->onsets;
    j["values"] = c->values;
  } else {
    const auto& nw = std::get<NoteWiseFeature>(feature);
    Json entries = Json::object();
    for (std::size_t i = 0; i < nw.note_ids.size(); ++i) entries[nw.note_ids[i]] = nw.values[i];
    j["entries"] = std::move(entries);
  }
  if (randomization) {
    j["randomization"] = {{"scheme", std::string(to_string(randomization->scheme))},
                          {"sigma", randomization->sigma},
                          {"seed", randomization->seed},
                          {"index", randomization->index}};
  }
  return j;
}

Feature feature_from_json(const Json& doc) {
  try {
    const FeatureKind kind = parse_feature_kind(doc.at("kind").get<std::string>());
    if (is_onset_wise(kind)) {
      ExpressionCurve c;
      c.kind = kind;
      c.onsets = doc.at("onsets").get<std::vector<double>>();
      c.values = doc.at("values").get<std::vector<double>>();
      if (c.onsets.size() != c.values.size()) throw ShapeError("curve onsets and values differ in length");
      return c;
    }
    NoteWiseFeature f;
    f.kind = kind;
    for (const auto& [id, value] : doc.at("entries").items()) {
      f.note_ids.push_back(id);
      f.values.push_back(value.get<double>());
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError(std::string("malformed curve JSON: ") + e.what());
  }
}

std::string grid_report_tsv(const GridResult& grid, StandardizationKind standardization) {
  const auto& features = grid.options.features;
  std::string out;
  out += "# expeval " + std::string(kVersion) + " evaluate report\n";
  out += "# seed: " + std::to_string(grid.options.seed) + "\n";
  out += "# randoms_per_piece: " + std::to_string(grid.options.randoms_per_piece) + "\n";
  out += "# scheme: " + std::string(to_string(QuantileScheme::Tails5_90_5)) + "\n";
  out += "# noise_level: average expert std per piece\n";
  out += "# features: " + join_features(features) + "\n";
  out += "# standardization: " + std::string(to_string(standardization)) + "\n";
  out += "# pieces: " + std::to_string(grid.pieces) + "\n";
  out += "# experiment_cells: " + std::to_string(grid.experiment_cells) + "\n";
  out += "# failed_cells: " + std::to_string(grid.failed_cells) + "\n";
  for (const auto& f : grid.failures) {
    if (!f.standardization.empty() && f.standardization != to_string(standardization)) continue;
    out += "# failed: " + f.piece_id + " " + (f.feature.empty() ? std::string("all") : f.feature) + ": " + f.message + "\n";
  }

  out += "piece\tcomposer\tn_experts\tn_onsets";
  for (auto k : features) {
    const std::string p(to_string(k));
    out += "\t" + p + "_mse_ee\t" + p + "_mse_er\t" + p + "_mse_rr\t" + p + "_reliability\t" + p + "_validity_pct";
  }
  out += "\n";

  struct Row {
    std::string composer;
    std::size_t n_experts = 0;
    std::size_t n_onsets = 0;
    std::map<FeatureKind, const PieceStatistics*> stats;
  };
  std::map<std::string, Row> rows;
  std::vector<const DatasetReport*> reports;
  for (auto k : features) {
    const auto& r = grid.report(k, standardization);
    reports.push_back(&r);
    for (const auto& p : r.per_piece) {
      Row& row = rows[p.piece_id];
      row.composer = p.composer;
      row.n_experts = p.stats.n_experts;
      row.n_onsets = p.n_onsets;
      row.stats[k] = &p.stats;
    }
  }

  auto block = [](const PieceStatistics* s) {
    if (!s) return std::string("\tNA\tNA\tNA\tNA\tNA");
    return "\t" + fixed(s->mean_mse_expert_expert, 2) + "\t" + fixed(s->mean_mse_expert_random, 2) + "\t" +
           fixed(s->mean_mse_random_random, 2) + "\t" + fixed(s->reliability, 2) + "\t" +
           fixed(100.0 * s->validity_error, 1);
  };

  std::size_t total_experts = 0, total_onsets = 0;
  for (const auto& [piece, row] : rows) {
    total_experts += row.n_experts;
    total_onsets += row.n_onsets;
    out += piece + "\t" + row.composer + "\t" + std::to_string(row.n_experts) + "\t" + std::to_string(row.n_onsets);
    for (auto k : features) {
      auto it = row.stats.find(k);
      out += block(it == row.stats.end() ? nullptr : it->second);
    }
    out += "\n";
  }
  out += "Dataset\t\t" + std::to_string(total_experts) + "\t" + std::to_string(total_onsets);
  for (const auto* r : reports) out += block(r->per_piece.empty() ? nullptr : &r->aggregate);
  out += "\n";
  return out;
}

Json grid_report_json(const GridResult& grid) {
  Json j;
  j["tool"] = "expeval";
  j["version"] = kVersion;
  Json config;
  config["seed"] = grid.options.seed;
  config["randoms_per_piece"] = grid.options.randoms_per_piece;
  config["scheme"] = std::string(to_string(QuantileScheme::Tails5_90_5));
  config["noise_level"] = "average expert std per piece";
  Json features = Json::array();
  for (auto k : grid.options.features) features.push_back(std::string(to_string(k)));
  config["features"] = features;
  Json stds = Json::array();
  for (auto s : grid.options.standardizations) stds.push_back(std::string(to_string(s)));
  config["standardizations"] = stds;
  j["config"] = config;
  j["pieces"] = grid.pieces;
  j["experiment_cells"] = grid.experiment_cells;
  j["failed_cells"] = grid.failed_cells;

  Json reports = Json::array();
  for (const auto& r : grid.reports) {
    Json rj;
    rj["feature"] = std::string(to_string(r.feature));
    rj["standardization"] = std::string(to_string(r.standardization));
    Json pieces = Json::array();
    for (const auto& p : r.per_piece) {
      Json pj;
      pj["piece_id"] = p.piece_id;
      pj["composer"] = p.composer;
      pj["n_onsets"] = p.n_onsets;
      const Json stats = stats_json(p.stats);
      for (const auto& [key, value] : stats.items()) pj[key] = value;
      pieces.push_back(std::move(pj));
    }
    rj["per_piece"] = std::move(pieces);
    Json agg = stats_json(r.aggregate);
    agg["n_onsets"] = r.total_onsets;
    agg["pieces"] = r.per_piece.size();
    rj["aggregate"] = std::move(agg);
    reports.push_back(std::move(rj));
  }
  j["reports"] = std::move(reports);

  Json failures = Json::array();
  for (const auto& f : grid.failures)
    failures.push_back({{"piece_id", f.piece_id},
                        {"feature", f.feature},
                        {"standardization", f.standardization},
                        {"status", "failed"},
                        {"message", f.message}});
  j["failures"] = std::move(failures);
  return j;
}

}  // namespace expeval
