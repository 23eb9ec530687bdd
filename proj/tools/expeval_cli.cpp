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

// expeval-cli: command-line front end over the expeval C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expeval.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitNothingEvaluated = 3;
constexpr int kExitInfeasible = 4;

// Carries a non-zero exit code out of a command.
struct CommandError : std::runtime_error {
  CommandError(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

int exit_code_for(expeval_status status) {
  switch (status) {
    case EXPEVAL_OK: return kExitOk;
    case EXPEVAL_ERR_CALIBRATION_INFEASIBLE: return kExitInfeasible;
    case EXPEVAL_ERR_INTERNAL: return kExitFailure;
    default: return kExitInput;
  }
}

void check(expeval_status status, const std::string& context = {}) {
  if (status == EXPEVAL_OK) return;
  std::string msg = expeval_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw CommandError(exit_code_for(status), msg);
}

struct StringDeleter {
  void operator()(char* s) const { expeval_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

std::string take(char* s) {
  OwnedString owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};
using Performance = std::unique_ptr<expeval_performance, HandleDeleter<expeval_performance, expeval_performance_free>>;
using Corpus = std::unique_ptr<expeval_corpus, HandleDeleter<expeval_corpus, expeval_corpus_free>>;
using Curve = std::unique_ptr<expeval_curve, HandleDeleter<expeval_curve, expeval_curve_free>>;
using Grid = std::unique_ptr<expeval_grid, HandleDeleter<expeval_grid, expeval_grid_free>>;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// Parses "a..b" or a single number "a".
template <typename T>
std::pair<T, T> parse_range(const std::string& text, const char* what) {
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      const T v = static_cast<T>(std::stoll(text, &used));
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
    const T lo = static_cast<T>(std::stoll(a, &used));
    if (used != a.size()) throw std::invalid_argument(text);
    const T hi = static_cast<T>(std::stoll(b, &used));
    if (used != b.size()) throw std::invalid_argument(text);
    if (hi < lo) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw CommandError(kExitInput, std::string("invalid ") + what + " range '" + text + "' (expected a..b)");
  }
}

expeval_feature feature_from(const std::string& name) {
  expeval_feature f{};
  check(expeval_feature_from_name(name.c_str(), &f));
  return f;
}

expeval_standardization standardization_from(const std::string& name) {
  expeval_standardization s{};
  check(expeval_standardization_from_name(name.c_str(), &s));
  return s;
}

expeval_scheme scheme_from(const std::string& name) {
  expeval_scheme s{};
  check(expeval_scheme_from_name(name.c_str(), &s));
  return s;
}

Corpus load_corpus(const std::string& dir) {
  expeval_corpus* c = nullptr;
  check(expeval_corpus_load_dir(dir.c_str(), &c), dir);
  return Corpus(c);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CommandError(kExitInput, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw CommandError(kExitInput, "write failed for '" + path.string() + "'");
}

// Writes to `out` when given, otherwise to stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file(out, text);
  }
}

std::string perfalign_extension() { return ".perfalign"; }

std::vector<fs::path> perfalign_files(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == perfalign_extension()) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  return paths;
}

// A directory holding .perfalign files is a piece; otherwise its
// subdirectories are taken as the pieces.
std::vector<std::string> expand_piece_dirs(const std::vector<std::string>& inputs) {
  std::vector<std::string> dirs;
  for (const auto& in : inputs) {
    if (!fs::is_directory(in)) throw CommandError(kExitInput, "'" + in + "' is not a directory");
    if (!perfalign_files(in).empty()) {
      dirs.push_back(in);
      continue;
    }
    std::vector<std::string> sub;
    for (const auto& entry : fs::directory_iterator(in))
      if (entry.is_directory()) sub.push_back(entry.path().string());
    std::sort(sub.begin(), sub.end());
    if (sub.empty()) dirs.push_back(in);  // let the loader report the empty piece
    dirs.insert(dirs.end(), sub.begin(), sub.end());
  }
  return dirs;
}

std::string piece_id_of(const fs::path& file) {
  const auto parent = fs::absolute(file).parent_path().filename().string();
  return parent.empty() ? file.stem().string() : parent;
}

struct MeasureOption {
  std::string text;
  std::pair<int, int> get() const { return text.empty() ? std::pair{0, 0} : parse_range<int>(text, "measure"); }
};

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  std::vector<std::string> inputs;
  std::string features = "tempo,velocity,timing,articulation";
  std::string out = ".";
  std::string format = "json";
};

int run_extract(const ExtractArgs& a) {
  std::vector<fs::path> files;
  for (const auto& in : a.inputs) {
    if (fs::is_directory(in)) {
      auto found = perfalign_files(in);
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(in)) {
      files.emplace_back(in);
    } else {
      throw CommandError(kExitInput, "'" + in + "' does not exist");
    }
  }
  if (files.empty()) throw CommandError(kExitInput, "no performances found");

  std::vector<expeval_feature> features;
  for (const auto& name : split_list(a.features)) features.push_back(feature_from(name));
  if (features.empty()) throw CommandError(kExitInput, "no features requested");

  // Parse everything first so a corrupt file leaves no partial output.
  std::vector<Performance> perfs;
  std::vector<std::string> diagnostics;
  for (const auto& f : files) {
    expeval_performance* p = nullptr;
    const auto st = expeval_performance_read(f.string().c_str(), piece_id_of(f).c_str(), &p);
    if (st != EXPEVAL_OK) {
      diagnostics.push_back(f.string() + ": " + expeval_last_error());
      continue;
    }
    perfs.emplace_back(p);
  }
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) std::cerr << "error: " << d << '\n';
    throw CommandError(kExitInput, std::to_string(diagnostics.size()) + " of " + std::to_string(files.size()) +
                                       " file(s) failed to parse; nothing written");
  }

  std::vector<std::pair<std::string, std::string>> outputs;  // path, json
  for (std::size_t i = 0; i < perfs.size(); ++i) {
    const std::string performer = expeval_performance_performer_id(perfs[i].get());
    const std::string piece = piece_id_of(files[i]);
    for (const auto f : features) {
      expeval_curve* c = nullptr;
      check(expeval_curve_extract(perfs[i].get(), f, &c), files[i].string());
      Curve curve(c);
      char* json = nullptr;
      check(expeval_curve_to_json(curve.get(), piece.c_str(), performer.c_str(), &json));
      outputs.emplace_back((fs::path(a.out) / (performer + "." + expeval_feature_name(f) + ".json")).string(),
                           take(json));
    }
  }
  Json written = Json::array();
  for (const auto& [path, json] : outputs) {
    write_file(path, json + "\n");
    written.push_back(path);
  }
  if (a.format == "json")
    std::cout << Json{{"files", written}}.dump(2) << '\n';
  else
    for (const auto& p : written) std::cout << p.get<std::string>() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- sample / calibrate / rate

struct CalibrateArgs {
  std::string piece;
  std::string feature = "tempo";
  std::string scheme = "quartiles";
  std::string standardization = "standard_score";
  double target = 0.5;
  double tolerance = 0.01;
  std::size_t mc_samples = 2000;
  MeasureOption measures;
  std::string out;
  std::string format = "json";
};

expeval_calibrate_options calibrate_options(const CalibrateArgs& a, std::uint64_t seed, unsigned threads) {
  expeval_calibrate_options o;
  expeval_calibrate_default_options(&o);
  o.feature = feature_from(a.feature);
  o.scheme = scheme_from(a.scheme);
  o.standardization = standardization_from(a.standardization);
  o.target = a.target;
  o.tolerance = a.tolerance;
  o.mc_samples = a.mc_samples;
  o.seed = seed;
  o.threads = threads;
  std::tie(o.first_measure, o.last_measure) = a.measures.get();
  return o;
}

Json calibration_json(const CalibrateArgs& a, const expeval_corpus* corpus, std::uint64_t seed,
                      const expeval_calibration& r) {
  return Json{{"piece_id", expeval_corpus_piece_id(corpus)},
              {"feature", a.feature},
              {"scheme", a.scheme},
              {"standardization", a.standardization},
              {"target", a.target},
              {"tolerance", a.tolerance},
              {"seed", seed},
              {"sigma", r.sigma},
              {"achieved_rate", r.achieved_rate},
              {"rate_at_zero", r.rate_at_zero},
              {"sigma_bar", r.sigma_bar},
              {"iterations", r.iterations},
              {"mc_samples", r.mc_samples},
              {"converged", r.converged != 0},
              {"monotone", r.monotone != 0}};
}

int run_calibrate(const CalibrateArgs& a, std::uint64_t seed, unsigned threads) {
  const auto corpus = load_corpus(a.piece);
  const auto opts = calibrate_options(a, seed, threads);
  expeval_calibration r{};
  check(expeval_calibrate(corpus.get(), &opts, &r), a.piece);
  if (!r.converged) std::cerr << "warning: calibration stopped before reaching the tolerance\n";
  if (!r.monotone) std::cerr << "warning: identification rate was not monotone in sigma\n";
  const Json doc = calibration_json(a, corpus.get(), seed, r);
  if (a.format == "json") {
    emit(a.out, doc.dump(2));
  } else {
    std::string tsv = "key\tvalue\n";
    for (const auto& [k, v] : doc.items()) tsv += k + "\t" + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    emit(a.out, tsv);
  }
  return kExitOk;
}

struct RateArgs {
  CalibrateArgs base;
  double sigma = 0.0;
};

int run_rate(const RateArgs& a, std::uint64_t seed, unsigned threads) {
  const auto corpus = load_corpus(a.base.piece);
  const auto opts = calibrate_options(a.base, seed, threads);
  double rate = 0.0;
  check(expeval_identification_rate(corpus.get(), &opts, a.sigma, &rate), a.base.piece);
  const Json doc{{"piece_id", expeval_corpus_piece_id(corpus.get())},
                 {"feature", a.base.feature},
                 {"scheme", a.base.scheme},
                 {"standardization", a.base.standardization},
                 {"sigma", a.sigma},
                 {"mc_samples", a.base.mc_samples},
                 {"seed", seed},
                 {"rate", rate}};
  if (a.base.format == "json")
    emit(a.base.out, doc.dump(2));
  else
    emit(a.base.out, "sigma\trate\n" + fixed(a.sigma, 6) + "\t" + fixed(rate, 4) + "\n");
  return kExitOk;
}

struct SampleArgs {
  CalibrateArgs base;  // piece, feature, scheme, measures, out, and the calibration knobs for --target
  std::optional<double> sigma;
  std::optional<double> target;
  std::size_t count = 1;
};

int run_sample(const SampleArgs& a, std::uint64_t seed, unsigned threads) {
  const auto corpus = load_corpus(a.base.piece);
  double sigma = 0.0;
  if (a.sigma) {
    sigma = *a.sigma;
  } else if (a.target) {
    CalibrateArgs c = a.base;
    c.target = *a.target;
    const auto opts = calibrate_options(c, seed, threads);
    expeval_calibration r{};
    check(expeval_calibrate(corpus.get(), &opts, &r), a.base.piece);
    sigma = r.sigma;
    std::cerr << "calibrated sigma " << sigma << " (rate " << r.achieved_rate << ")\n";
  } else {
    throw CommandError(kExitInput, "sample needs --sigma or --target");
  }
  expeval_sample_options o;
  expeval_sample_default_options(&o);
  o.feature = feature_from(a.base.feature);
  o.scheme = scheme_from(a.base.scheme);
  o.sigma = sigma;
  o.seed = seed;
  o.count = a.count;
  std::tie(o.first_measure, o.last_measure) = a.base.measures.get();
  char* json = nullptr;
  check(expeval_sample(corpus.get(), &o, &json), a.base.piece);
  emit(a.base.out, take(json));
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::vector<std::string> inputs;
  std::string features = "velocity,tempo";
  std::string standardizations = "none,mean,mean_log,standard_score";
  std::size_t randoms = 64;
  std::string out;
  std::string format = "tsv";
};

int run_evaluate(const EvaluateArgs& a, std::uint64_t seed, unsigned threads) {
  const auto dirs = expand_piece_dirs(a.inputs);
  std::vector<const char*> dir_ptrs;
  for (const auto& d : dirs) dir_ptrs.push_back(d.c_str());

  std::vector<expeval_feature> features;
  for (const auto& n : split_list(a.features)) features.push_back(feature_from(n));
  std::vector<expeval_standardization> stds;
  for (const auto& n : split_list(a.standardizations)) stds.push_back(standardization_from(n));
  if (features.empty() || stds.empty()) throw CommandError(kExitInput, "need at least one feature and standardization");

  expeval_evaluate_options o;
  expeval_evaluate_default_options(&o);
  o.features = features.data();
  o.n_features = features.size();
  o.standardizations = stds.data();
  o.n_standardizations = stds.size();
  o.randoms_per_piece = a.randoms;
  o.seed = seed;
  o.threads = threads;

  expeval_grid* g = nullptr;
  check(expeval_evaluate(dir_ptrs.data(), dir_ptrs.size(), &o, &g));
  const Grid grid(g);
  std::size_t pieces = 0, evaluated = 0, cells = 0, failed = 0;
  check(expeval_grid_counts(grid.get(), &pieces, &evaluated, &cells, &failed));
  std::cerr << "pieces: " << dirs.size() << " given, " << pieces << " loaded, " << evaluated << " evaluated\n"
            << "experiment cells: " << cells << " (" << failed << " failed)\n";

  char* json_raw = nullptr;
  check(expeval_grid_json(grid.get(), &json_raw));
  const std::string json = take(json_raw);
  std::vector<std::pair<expeval_standardization, std::string>> tsvs;
  for (const auto s : stds) {
    char* t = nullptr;
    check(expeval_grid_tsv(grid.get(), s, &t));
    tsvs.emplace_back(s, take(t));
  }

  if (!a.out.empty() && a.out != "-") {
    fs::create_directories(a.out);
    for (const auto& [s, text] : tsvs)
      write_file(fs::path(a.out) / (std::string("report.") + expeval_standardization_name(s) + ".tsv"), text);
    write_file(fs::path(a.out) / "report.json", json + "\n");
  } else if (a.format == "json") {
    std::cout << json << '\n';
  } else {
    for (const auto& [s, text] : tsvs) std::cout << text;
  }
  if (evaluated == 0) {
    std::cerr << "error: no piece was evaluated\n";
    return kExitNothingEvaluated;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- scan

struct ScanArgs {
  std::string piece;
  std::string feature = "tempo";
  int window = 9;
  std::size_t min_onsets = 8;
  std::size_t top = 0;
  std::string out;
  std::string format = "json";
};

int run_scan(const ScanArgs& a) {
  const auto corpus = load_corpus(a.piece);
  char* raw = nullptr;
  check(expeval_scan(corpus.get(), feature_from(a.feature), a.window, a.min_onsets, &raw), a.piece);
  Json windows = Json::parse(take(raw));
  if (a.top > 0 && windows.size() > a.top) windows.erase(windows.begin() + static_cast<std::ptrdiff_t>(a.top), windows.end());
  if (a.format == "json") {
    emit(a.out, windows.dump(2));
  } else {
    std::string tsv = "start_measure\tlength\tmean_pairwise_correlation\tonsets\tpairs\n";
    for (const auto& w : windows)
      tsv += std::to_string(w["start_measure"].get<int>()) + "\t" + std::to_string(w["length"].get<int>()) + "\t" +
             fixed(w["mean_pairwise_correlation"].get<double>(), 4) + "\t" +
             std::to_string(w["onsets"].get<std::size_t>()) + "\t" + std::to_string(w["pairs"].get<std::size_t>()) +
             "\n";
    emit(a.out, tsv);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string base;
  std::string curve;
  std::string feature;
  std::size_t index = 0;
  std::string out;
};

int run_render(const RenderArgs& a) {
  expeval_performance* p = nullptr;
  check(expeval_performance_read(a.base.c_str(), piece_id_of(a.base).c_str(), &p), a.base);
  const Performance base(p);

  Curve target;
  if (!a.curve.empty()) {
    std::ifstream in(a.curve, std::ios::binary);
    if (!in) throw CommandError(kExitInput, "cannot open '" + a.curve + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    // Accept the array written by `sample` as well as a single document.
    try {
      const Json doc = Json::parse(text);
      if (doc.is_array()) {
        if (a.index >= doc.size()) throw CommandError(kExitInput, "curve index out of range");
        text = doc[a.index].dump();
      }
    } catch (const Json::exception& e) {
      throw CommandError(kExitInput, a.curve + ": invalid JSON: " + e.what());
    }
    expeval_curve* c = nullptr;
    check(expeval_curve_from_json(text.c_str(), &c), a.curve);
    target.reset(c);
    if (!a.feature.empty()) {
      expeval_feature have{};
      check(expeval_curve_feature(target.get(), &have));
      if (have != feature_from(a.feature))
        throw CommandError(kExitInput, "curve kind '" + std::string(expeval_feature_name(have)) +
                                           "' does not match --feature " + a.feature);
    }
  } else {
    if (a.feature.empty()) throw CommandError(kExitInput, "render needs --curve or --feature");
    expeval_curve* c = nullptr;
    check(expeval_curve_extract(base.get(), feature_from(a.feature), &c), a.base);
    target.reset(c);
  }

  expeval_performance* r = nullptr;
  std::size_t clipped = 0;
  check(expeval_render(base.get(), target.get(), &r, &clipped));
  const Performance rendered(r);
  if (clipped > 0) std::cerr << "warning: " << clipped << " velocity value(s) clipped to [1,127]\n";
  char* text = nullptr;
  check(expeval_performance_write(rendered.get(), &text));
  emit(a.out, take(text));
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::size_t pieces = 33;
  std::string performers = "6..34";
  std::string onsets = "40..120";
  double dispersion = 1.0;
  std::string out;
};

int run_synth(const SynthArgs& a, std::uint64_t seed) {
  expeval_synth_options o;
  expeval_synth_default_options(&o);
  o.pieces = a.pieces;
  std::tie(o.performers_min, o.performers_max) = parse_range<std::size_t>(a.performers, "performer");
  std::tie(o.onsets_min, o.onsets_max) = parse_range<std::size_t>(a.onsets, "onset");
  o.dispersion = a.dispersion;
  o.seed = seed;
  check(expeval_synth(&o, a.out.c_str()), a.out);
  std::cerr << "wrote " << a.pieces << " piece(s) to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- binom

struct BinomArgs {
  long n = 0;
  long k = 0;
  std::string format = "text";
};

int run_binom(const BinomArgs& a) {
  double p = 0.0;
  check(expeval_binomial_probability(a.n, a.k, &p));
  if (a.format == "json")
    std::cout << Json{{"n", a.n}, {"k", a.k}, {"probability", p}, {"percent", fixed(100.0 * p, 2) + "%"}}.dump(2)
              << '\n';
  else
    std::cout << fixed(100.0 * p, 2) << "%\n";
  return kExitOk;
}

void add_calibration_flags(CLI::App* cmd, CalibrateArgs& a, bool with_target) {
  cmd->add_option("piece", a.piece, "Piece directory of .perfalign files")->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--feature", a.feature, "Feature kind")->capture_default_str();
  cmd->add_option("--scheme", a.scheme, "Quantile scheme: quartiles or tails_5_90_5")->capture_default_str();
  cmd->add_option("--standardization", a.standardization, "Standardization used by the metric")
      ->capture_default_str();
  cmd->add_option("--mc-samples", a.mc_samples, "Monte-Carlo triplets per rate estimate")->capture_default_str();
  cmd->add_option("--measures", a.measures.text, "Restrict to an excerpt, e.g. 3..11");
  cmd->add_option("--out", a.out, "Output file (default stdout)");
  if (with_target) {
    cmd->add_option("--tolerance", a.tolerance, "Rate tolerance")->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation tools for expressive performance models"};
  app.set_version_flag("--version", std::string(expeval_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  unsigned threads = 1;
  app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")
      ->envname("EXPEVAL_THREADS")
      ->capture_default_str();

  const auto json_or_tsv = CLI::IsMember({"json", "tsv"});

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Extract feature curves from performances");
  c_extract->add_option("inputs", extract.inputs, "Piece directories or .perfalign files")->required();
  c_extract->add_option("--features", extract.features, "Comma-separated feature kinds")->capture_default_str();
  c_extract->add_option("--out", extract.out, "Output directory for curve JSON")->capture_default_str();
  c_extract->add_option("--format", extract.format, "Listing format")->check(json_or_tsv)->capture_default_str();

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Draw randomized curves around the expert average");
  add_calibration_flags(c_sample, sample.base, true);
  auto* o_sigma = c_sample->add_option("--sigma", sample.sigma, "Noise level");
  auto* o_target = c_sample->add_option("--target", sample.target, "Calibrate the noise level to this rate first");
  o_sigma->excludes(o_target);
  c_sample->add_option("--count", sample.count, "Number of curves")->capture_default_str();
  c_sample->add_option("--format", sample.base.format, "Output format")->check(CLI::IsMember({"json"}));

  CalibrateArgs calibrate;
  auto* c_calibrate = app.add_subcommand("calibrate", "Find the noise level that reaches a target rate");
  add_calibration_flags(c_calibrate, calibrate, true);
  c_calibrate->add_option("--target", calibrate.target, "Target identification rate in (0,1)")->capture_default_str();
  c_calibrate->add_option("--format", calibrate.format, "Output format")->check(json_or_tsv)->capture_default_str();

  RateArgs rate;
  auto* c_rate = app.add_subcommand("rate", "Estimate the identification rate at a fixed noise level");
  add_calibration_flags(c_rate, rate.base, false);
  c_rate->add_option("--sigma", rate.sigma, "Noise level")->required();
  c_rate->add_option("--format", rate.base.format, "Output format")->check(json_or_tsv)->capture_default_str();

  EvaluateArgs evaluate;
  auto* c_evaluate = app.add_subcommand("evaluate", "Run the reliability/validity grid");
  c_evaluate->add_option("inputs", evaluate.inputs, "Piece directories, or a directory of piece directories")
      ->required();
  c_evaluate->add_option("--features", evaluate.features, "Comma-separated feature kinds")->capture_default_str();
  c_evaluate->add_option("--standardizations", evaluate.standardizations, "Comma-separated standardizations")
      ->capture_default_str();
  c_evaluate->add_option("--randoms", evaluate.randoms, "Randomized curves per piece")->capture_default_str();
  c_evaluate->add_option("--out", evaluate.out, "Directory for report.<std>.tsv and report.json");
  c_evaluate->add_option("--format", evaluate.format, "Stdout format when --out is absent")
      ->check(json_or_tsv)
      ->capture_default_str();

  ScanArgs scan;
  auto* c_scan = app.add_subcommand("scan", "Rank excerpt windows by inter-performance correlation");
  c_scan->add_option("piece", scan.piece, "Piece directory")->required()->check(CLI::ExistingDirectory);
  c_scan->add_option("--feature", scan.feature, "Feature kind")->capture_default_str();
  c_scan->add_option("--window", scan.window, "Window length in measures")->capture_default_str();
  c_scan->add_option("--min-onsets", scan.min_onsets, "Minimum onsets per window")->capture_default_str();
  c_scan->add_option("--top", scan.top, "Keep only the best N windows (0 = all)")->capture_default_str();
  c_scan->add_option("--out", scan.out, "Output file (default stdout)");
  c_scan->add_option("--format", scan.format, "Output format")->check(json_or_tsv)->capture_default_str();

  RenderArgs render;
  auto* c_render = app.add_subcommand("render", "Rebuild a performance from a target feature curve");
  c_render->add_option("base", render.base, "Base .perfalign file")->required()->check(CLI::ExistingFile);
  c_render->add_option("--curve", render.curve, "Curve JSON (single document or a sample array)");
  c_render->add_option("--index", render.index, "Element of a sample array to use")->capture_default_str();
  c_render->add_option("--feature", render.feature, "Feature kind (without --curve: the base's own curve)");
  c_render->add_option("--out", render.out, "Output .perfalign file (default stdout)");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  c_synth->add_option("--pieces", synth.pieces, "Number of pieces")->capture_default_str();
  c_synth->add_option("--performers", synth.performers, "Performers per piece, a..b")->capture_default_str();
  c_synth->add_option("--onsets", synth.onsets, "Score onsets per piece, a..b")->capture_default_str();
  c_synth->add_option("--dispersion", synth.dispersion, "Spread of performers around the shared shape")
      ->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output root directory")->required();

  BinomArgs binom;
  auto* c_binom = app.add_subcommand("binom", "Exact binomial outcome probability C(n,k)/2^n");
  c_binom->add_option("--n", binom.n, "Number of trials")->required();
  c_binom->add_option("--k", binom.k, "Number of successes")->required();
  c_binom->add_option("--format", binom.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*c_extract) return run_extract(extract);
    if (*c_sample) return run_sample(sample, seed, threads);
    if (*c_calibrate) return run_calibrate(calibrate, seed, threads);
    if (*c_rate) return run_rate(rate, seed, threads);
    if (*c_evaluate) return run_evaluate(evaluate, seed, threads);
    if (*c_scan) return run_scan(scan);
    if (*c_render) return run_render(render);
    if (*c_synth) return run_synth(synth, seed);
    if (*c_binom) return run_binom(binom);
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInput;
}
