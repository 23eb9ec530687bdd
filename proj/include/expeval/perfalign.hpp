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

// Score-aligned performance records and the perfalign v1 text format.
//
// A perfalign v1 file starts with the exact line `#perfalign v1`, followed by
// tab-separated rows
//
//   note_id  pitch  measure  score_onset  score_duration  perf_onset  perf_duration  velocity
//
// Lines starting with `#` are comments. Score positions are in beats,
// performance times in seconds.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace expeval {

struct AlignedNote {
  std::string note_id;
  int pitch = 0;
  int measure = 1;
  double score_onset = 0.0;
  double score_duration = 0.0;
  double perf_onset = 0.0;
  double perf_duration = 0.0;
  int velocity = 0;

  friend bool operator==(const AlignedNote&, const AlignedNote&) = default;
};

/// Score-side tuple shared by every performance of a piece.
struct ScoreNote {
  std::string note_id;
  int pitch;
  int measure;
  double score_onset;
  double score_duration;

  friend bool operator==(const ScoreNote&, const ScoreNote&) = default;
};

class PerformanceRecord {
 public:
  PerformanceRecord() = default;

  /// Validates every note and sorts into canonical (score_onset, pitch, note_id) order.
  /// Throws ValidationError listing all violations.
  static PerformanceRecord create(std::string performer_id, std::string piece_id,
                                  std::vector<AlignedNote> notes);

  const std::string& performer_id() const noexcept { return performer_id_; }
  const std::string& piece_id() const noexcept { return piece_id_; }
  const std::vector<AlignedNote>& notes() const noexcept { return notes_; }
  bool empty() const noexcept { return notes_.empty(); }

  /// Sorted distinct score onsets.
  std::vector<double> onset_grid() const;

  friend bool operator==(const PerformanceRecord&, const PerformanceRecord&) = default;

 private:
  std::string performer_id_;
  std::string piece_id_;
  std::vector<AlignedNote> notes_;
};

class PieceCorpus {
 public:
  PieceCorpus(std::string piece_id, std::vector<PerformanceRecord> performances,
              std::vector<double> onset_grid, std::string composer = {})
      : piece_id_(std::move(piece_id)),
        performances_(std::move(performances)),
        onset_grid_(std::move(onset_grid)),
        composer_(std::move(composer)) {}

  const std::string& piece_id() const noexcept { return piece_id_; }
  const std::vector<PerformanceRecord>& performances() const noexcept { return performances_; }
  const std::vector<double>& onset_grid() const noexcept { return onset_grid_; }
  const std::string& composer() const noexcept { return composer_; }
  std::size_t size() const noexcept { return performances_.size(); }

 private:
  std::string piece_id_;
  std::vector<PerformanceRecord> performances_;
  std::vector<double> onset_grid_;
  std::string composer_;
};

inline constexpr std::string_view kPerfalignHeader = "#perfalign v1";
inline constexpr std::string_view kPerfalignExtension = ".perfalign";

PerformanceRecord parse_performance(std::string_view text, std::string performer_id,
                                    std::string piece_id);

std::string write_performance(const PerformanceRecord& record);

/// `files` holds (performer_id, file text) pairs.
PieceCorpus load_corpus(std::string piece_id,
                        const std::vector<std::pair<std::string, std::string>>& files);

/// Reads every `*.perfalign` file in `dir` (performer id = file stem, piece id =
/// directory name). An optional `composer.txt` supplies report metadata.
PieceCorpus load_corpus_dir(const std::filesystem::path& dir);

PerformanceRecord read_performance_file(const std::filesystem::path& path, std::string piece_id);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_decimal(double value);

}  // namespace expeval
