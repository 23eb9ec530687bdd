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

#include "expeval/perfalign.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "expeval/error.hpp"

namespace expeval {

namespace {

constexpr std::size_t kColumns = 8;

std::string describe(const AlignedNote& n) { return "note '" + n.note_id + "'"; }

template <typename T>
bool parse_number(std::string_view field, T& out) {
  if (field.empty()) return false;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool canonical_less(const AlignedNote& a, const AlignedNote& b) {
  return std::tie(a.score_onset, a.pitch, a.note_id) < std::tie(b.score_onset, b.pitch, b.note_id);
}

ScoreNote score_side(const AlignedNote& n) {
  return {n.note_id, n.pitch, n.measure, n.score_onset, n.score_duration};
}

}  // namespace

std::string format_decimal(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

PerformanceRecord PerformanceRecord::create(std::string performer_id, std::string piece_id,
                                            std::vector<AlignedNote> notes) {
  std::vector<std::string> violations;
  std::unordered_set<std::string> seen;
  for (const auto& n : notes) {
    if (n.note_id.empty()) violations.push_back("empty note_id");
    if (!seen.insert(n.note_id).second) violations.push_back("duplicate note_id '" + n.note_id + "'");
    if (n.pitch < 0 || n.pitch > 127)
      violations.push_back(describe(n) + ": pitch " + std::to_string(n.pitch) + " outside [0,127]");
    if (n.measure < 1)
      violations.push_back(describe(n) + ": measure " + std::to_string(n.measure) + " not positive");
    if (!std::isfinite(n.score_onset) || n.score_onset < 0.0)
      violations.push_back(describe(n) + ": negative score_onset");
    if (!std::isfinite(n.score_duration) || n.score_duration <= 0.0)
      violations.push_back(describe(n) + ": score_duration must be positive");
    if (!std::isfinite(n.perf_onset)) violations.push_back(describe(n) + ": non-finite perf_onset");
    if (!std::isfinite(n.perf_duration) || n.perf_duration <= 0.0)
      violations.push_back(describe(n) + ": perf_duration must be positive");
    if (n.velocity < 1 || n.velocity > 127)
      violations.push_back(describe(n) + ": velocity " + std::to_string(n.velocity) +
                           " outside [1,127]");
  }
  std::set<double> onsets;
  for (const auto& n : notes) onsets.insert(n.score_onset);
  if (onsets.size() < 2) violations.push_back("fewer than 2 distinct score onsets");
  if (!violations.empty()) throw ValidationError(std::move(violations));

  std::sort(notes.begin(), notes.end(), canonical_less);
  PerformanceRecord r;
  r.performer_id_ = std::move(performer_id);
  r.piece_id_ = std::move(piece_id);
  r.notes_ = std::move(notes);
  return r;
}

std::vector<double> PerformanceRecord::onset_grid() const {
  std::vector<double> grid;
  for (const auto& n : notes_)
    if (grid.empty() || grid.back() != n.score_onset) grid.push_back(n.score_onset);
  return grid;
}

PerformanceRecord parse_performance(std::string_view text, std::string performer_id,
                                    std::string piece_id) {
  std::vector<AlignedNote> notes;
  std::vector<std::string> violations;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (line != kPerfalignHeader)
        throw FormatVersionError("first line must be exactly '" + std::string(kPerfalignHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty() || line.front() == '#') continue;

    auto fields = split_tabs(line);
    if (fields.size() != kColumns)
      throw RowError(line_no, "expected " + std::to_string(kColumns) + " tab-separated columns, got " +
                                  std::to_string(fields.size()));
    AlignedNote n;
    n.note_id = std::string(fields[0]);
    if (!parse_number(fields[1], n.pitch)) throw RowError(line_no, "unparsable pitch");
    if (!parse_number(fields[2], n.measure)) throw RowError(line_no, "unparsable measure");
    if (!parse_number(fields[3], n.score_onset) || !std::isfinite(n.score_onset))
      throw RowError(line_no, "unparsable score_onset");
    if (!parse_number(fields[4], n.score_duration) || !std::isfinite(n.score_duration))
      throw RowError(line_no, "unparsable score_duration");
    if (!parse_number(fields[5], n.perf_onset) || !std::isfinite(n.perf_onset))
      throw RowError(line_no, "unparsable perf_onset");
    if (!parse_number(fields[6], n.perf_duration) || !std::isfinite(n.perf_duration))
      throw RowError(line_no, "unparsable perf_duration");
    if (!parse_number(fields[7], n.velocity)) throw RowError(line_no, "unparsable velocity");

    // Range errors carry the row number; they are reported together below.
    const std::string where = "line " + std::to_string(line_no) + " (" + n.note_id + ")";
    if (n.velocity < 1 || n.velocity > 127)
      violations.push_back(where + ": velocity " + std::to_string(n.velocity) + " outside [1,127]");
    if (n.pitch < 0 || n.pitch > 127)
      violations.push_back(where + ": pitch " + std::to_string(n.pitch) + " outside [0,127]");
    if (n.score_duration <= 0.0) violations.push_back(where + ": score_duration must be positive");
    if (n.perf_duration <= 0.0) violations.push_back(where + ": perf_duration must be positive");
    if (n.measure < 1) violations.push_back(where + ": measure must be positive");
    if (n.score_onset < 0.0) violations.push_back(where + ": negative score_onset");
    notes.push_back(std::move(n));
  }
  if (!header_seen) throw FormatVersionError("empty file");
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return PerformanceRecord::create(std::move(performer_id), std::move(piece_id), std::move(notes));
}

std::string write_performance(const PerformanceRecord& record) {
  if (record.empty()) throw RefusedWrite("refusing to write a performance without notes");
  std::string out(kPerfalignHeader);
  out += '\n';
  for (const auto& n : record.notes()) {
    out += n.note_id;
    out += '\t';
    out += std::to_string(n.pitch);
    out += '\t';
    out += std::to_string(n.measure);
    for (double v : {n.score_onset, n.score_duration, n.perf_onset, n.perf_duration}) {
      out += '\t';
      out += format_decimal(v);
    }
    out += '\t';
    out += std::to_string(n.velocity);
    out += '\n';
  }
  return out;
}

PieceCorpus load_corpus(std::string piece_id,
                        const std::vector<std::pair<std::string, std::string>>& files) {
  if (files.size() < 2)
    throw CorpusTooSmallError("piece '" + piece_id + "' needs at least 2 performances, got " +
                              std::to_string(files.size()));
  std::vector<PerformanceRecord> perfs;
  perfs.reserve(files.size());
  std::set<std::string> performers;
  for (const auto& [performer, text] : files) {
    if (!performers.insert(performer).second)
      throw InvalidArgumentError("duplicate performer id '" + performer + "'");
    try {
      perfs.push_back(parse_performance(text, performer, piece_id));
    } catch (const Error& e) {
      throw Error(e.code(), "performance '" + performer + "': " + e.what());
    }
  }

  const auto& ref = perfs.front().notes();
  for (std::size_t p = 1; p < perfs.size(); ++p) {
    std::map<std::string, ScoreNote> other;
    for (const auto& n : perfs[p].notes()) other.emplace(n.note_id, score_side(n));
    for (const auto& n : ref) {
      auto it = other.find(n.note_id);
      if (it == other.end())
        throw ScoreMismatchError(n.note_id, "missing from performance '" + perfs[p].performer_id() + "'");
      if (!(it->second == score_side(n)))
        throw ScoreMismatchError(n.note_id, "score fields differ in performance '" +
                                                perfs[p].performer_id() + "'");
      other.erase(it);
    }
    if (!other.empty()) {
      // Report the earliest extra note in canonical order.
      const AlignedNote* first = nullptr;
      for (const auto& n : perfs[p].notes())
        if (other.count(n.note_id)) {
          first = &n;
          break;
        }
      throw ScoreMismatchError(first->note_id, "only present in performance '" +
                                                   perfs[p].performer_id() + "'");
    }
  }
  auto grid = perfs.front().onset_grid();
  return PieceCorpus(std::move(piece_id), std::move(perfs), std::move(grid));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

PerformanceRecord read_performance_file(const std::filesystem::path& path, std::string piece_id) {
  return parse_performance(read_text_file(path), path.stem().string(), std::move(piece_id));
}

PieceCorpus load_corpus_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == kPerfalignExtension)
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());

  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& p : paths) files.emplace_back(p.stem().string(), read_text_file(p));

  std::string piece_id = dir.filename().string();
  if (piece_id.empty()) piece_id = dir.parent_path().filename().string();
  PieceCorpus corpus = load_corpus(piece_id, files);

  std::string composer;
  if (fs::exists(dir / "composer.txt")) {
    composer = read_text_file(dir / "composer.txt");
    while (!composer.empty() && (composer.back() == '\n' || composer.back() == '\r'))
      composer.pop_back();
  }
  return PieceCorpus(corpus.piece_id(), corpus.performances(), corpus.onset_grid(), composer);
}

}  // namespace expeval
