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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "expeval/error.hpp"
#include "expeval/evaluation.hpp"
#include "expeval/synth.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace expeval;
using testsupport::note;

namespace {

oracle::Std to_oracle(StandardizationKind k) {
  switch (k) {
    case StandardizationKind::None: return oracle::Std::None;
    case StandardizationKind::Mean: return oracle::Std::Mean;
    case StandardizationKind::MeanLog: return oracle::Std::MeanLog;
    case StandardizationKind::StandardScore: return oracle::Std::StandardScore;
  }
  return oracle::Std::None;
}

OutcomeMatrix blank(std::size_t n, std::size_t m) {
  OutcomeMatrix o;
  o.experts = n;
  o.randoms = m;
  o.bits.assign(n * n * m, kUndefinedBit);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t e = 0; e < n; ++e)
      if (e != r)
        for (std::size_t j = 0; j < m; ++j) o.bits[r * n * m + e * m + j] = 1;
  return o;
}

void set_row(OutcomeMatrix& o, std::size_t r, std::size_t e, std::vector<int> bits) {
  for (std::size_t j = 0; j < bits.size(); ++j) o.bits[r * o.columns() + e * o.randoms + j] = static_cast<std::int8_t>(bits[j]);
}

std::vector<PieceCorpus> synthetic_corpora(std::size_t pieces, std::uint64_t seed) {
  SynthOptions o;
  o.pieces = pieces;
  o.performers_min = 3;
  o.performers_max = 7;
  o.onsets_min = 20;
  o.onsets_max = 40;
  o.seed = seed;
  std::vector<PieceCorpus> out;
  for (const auto& p : synthesize_corpus(o))
    out.emplace_back(p.piece_id, p.performances, p.performances.front().onset_grid(), p.composer);
  return out;
}

}  // namespace

TEST_CASE("two-model comparison") {
  const std::vector<double> rp{1, 2, 3, 4}, other{4, 1, 2, 2};
  CHECK(two_model_compare(rp, other, rp, StandardizationKind::None));
  CHECK_FALSE(two_model_compare(other, other, rp, StandardizationKind::None));  // ties favour neither
  CHECK_FALSE(two_model_compare(other, rp, rp, StandardizationKind::None));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = testsupport::random_vector(rng, 6, 1.0, 5.0);
    const auto b = testsupport::random_vector(rng, 6, 1.0, 5.0);
    const auto r = testsupport::random_vector(rng, 6, 1.0, 5.0);
    for (auto k : kAllStandardizations) {
      const auto o = to_oracle(k);
      const bool expect = oracle::mse(oracle::standardize(a, o), oracle::standardize(r, o)) <
                          oracle::mse(oracle::standardize(b, o), oracle::standardize(r, o));
      CHECK(two_model_compare(a, b, r, k) == expect);
    }
  }
}

TEST_CASE("outcome matrix shape") {
  const FeatureMatrix experts{{1, 2, 3}, {1, 2, 3.5}, {1.5, 2, 3}};
  const FeatureMatrix randoms{{9, 0, 9}, {0, 9, 0}};
  const auto m = outcome_matrix(experts, randoms, StandardizationKind::None);
  CHECK(m.columns() == 6);
  CHECK(m.bits.size() == 18);
  std::size_t undefined = 0;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t e = 0; e < 3; ++e)
      for (std::size_t j = 0; j < 2; ++j) {
        if (e == r) {
          CHECK(m.at(r, e, j) == kUndefinedBit);
          ++undefined;
        } else {
          CHECK(m.at(r, e, j) == 1);  // far randoms lose every comparison
        }
      }
  CHECK(undefined == 6);
  CHECK(m.defined_count() == 12);
  CHECK(validity_error(m) == 0.0);
  CHECK(reliability(m) == 1.0);
  CHECK_THROWS_AS(outcome_matrix({{1, 2}, {2, 3}}, randoms, StandardizationKind::None), TooFewPerformancesError);
  CHECK_THROWS_AS(outcome_matrix(experts, {{1, 2}}, StandardizationKind::None), ShapeError);
}

TEST_CASE("reliability definitions") {
  SUBCASE("identical all-one rows") { CHECK(reliability(blank(4, 3)) == 1.0); }
  SUBCASE("complementary rows correlate at -1, matching rows at +1") {
    auto o = blank(3, 4);
    set_row(o, 0, 2, {1, 0, 1, 0});
    set_row(o, 1, 2, {0, 1, 0, 1});  // pair (0,1): -1
    set_row(o, 0, 1, {1, 0, 1, 0});
    set_row(o, 2, 1, {1, 0, 1, 0});  // pair (0,2): +1
    set_row(o, 1, 0, {1, 1, 0, 0});
    set_row(o, 2, 0, {0, 0, 1, 1});  // pair (1,2): -1
    CHECK(reliability(o) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("constant row falls back to agreement") {
    auto o = blank(3, 4);
    set_row(o, 2, 1, {1, 1, 1, 0});  // pair (0,2) agrees on 3 of 4: 0.5
    set_row(o, 2, 0, {1, 1, 1, 0});  // pair (1,2) likewise
    CHECK(reliability(o) == doctest::Approx((1.0 + 0.5 + 0.5) / 3.0));
  }
  SUBCASE("validity counts zeros among defined bits") {
    auto o = blank(3, 2);
    set_row(o, 0, 1, {0, 0});
    set_row(o, 0, 2, {0, 0});
    set_row(o, 1, 0, {0, 0});
    CHECK(validity_error(o) == 0.5);
  }
  SUBCASE("a single reference is undefined") {
    OutcomeMatrix o;
    o.experts = 1;
    o.randoms = 1;
    o.bits = {kUndefinedBit};
    CHECK_THROWS_AS(reliability(o), UndefinedReliability);
  }
}

TEST_CASE("micro instances agree with exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> n_dist(3, 4), m_dist(2, 4), d_dist(2, 16);
  int instances = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = n_dist(rng), m = m_dist(rng), d = d_dist(rng);
    FeatureMatrix experts, randoms;
    const auto centre = testsupport::random_vector(rng, d, 1.0, 5.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto v = testsupport::random_vector(rng, d, 0.6);
      for (std::size_t t = 0; t < d; ++t) v[t] += centre[t];
      experts.push_back(v);
    }
    for (std::size_t j = 0; j < m; ++j) randoms.push_back(testsupport::random_vector(rng, d, 0.9, 5.0));
    for (auto k : kAllStandardizations) {
      const auto got = piece_statistics(experts, randoms, k);
      const auto want = oracle::evaluate_piece(experts, randoms, to_oracle(k));
      const auto matrix = outcome_matrix(experts, randoms, k);
      for (const auto& t : want.triplets) REQUIRE(matrix.at(t.reference, t.test, t.random) == t.bit);
      CHECK(got.defined_bits == want.defined);
      CHECK(matrix.defined_count() - matrix.favored_count() == want.zeros);
      CHECK(got.validity_error == want.validity_error);
      CHECK(std::abs(got.reliability - want.reliability) < 1e-12);
      CHECK(std::abs(got.mean_mse_expert_expert - want.mse_ee) < 1e-12);
      CHECK(std::abs(got.mean_mse_expert_random - want.mse_er) < 1e-12);
      CHECK(std::abs(got.mean_mse_random_random - want.mse_rr) < 1e-12);
    }
    ++instances;
  }
  CHECK(instances >= 20);
}

TEST_CASE("piece statistics invariants") {
  std::mt19937_64 rng(8);
  SUBCASE("identical experts have zero inter-expert error") {
    const auto e = testsupport::random_vector(rng, 10);
    const auto s = piece_statistics({e, e, e}, {testsupport::random_vector(rng, 10)}, StandardizationKind::Mean);
    CHECK(s.mean_mse_expert_expert == 0.0);
    CHECK(std::isnan(s.mean_mse_random_random));
    CHECK(s.defined_bits == 6);
  }
  SUBCASE("randoms copied from the experts") {
    FeatureMatrix e;
    for (int i = 0; i < 4; ++i) e.push_back(testsupport::random_vector(rng, 9));
    const auto s = piece_statistics(e, e, StandardizationKind::None);
    // cross mean over the multiset {mse(ei, ej)} including the zero diagonal
    double sum = 0.0;
    for (const auto& a : e)
      for (const auto& b : e) sum += oracle::mse(a, b);
    CHECK(std::abs(s.mean_mse_expert_random - sum / 16.0) < 1e-12);
    CHECK(std::abs(s.mean_mse_random_random - s.mean_mse_expert_expert) < 1e-12);
  }
  SUBCASE("a random equal to the reference never favours the test expert") {
    FeatureMatrix e;
    for (int i = 0; i < 3; ++i) e.push_back(testsupport::random_vector(rng, 7));
    const auto m = outcome_matrix(e, {e[0]}, StandardizationKind::None);
    for (std::size_t t = 1; t < 3; ++t) CHECK(m.at(0, t, 0) == 0);
  }
  SUBCASE("ranges and relabeling") {
    FeatureMatrix e, r;
    for (int i = 0; i < 5; ++i) e.push_back(testsupport::random_vector(rng, 12, 1.0, 3.0));
    for (int i = 0; i < 6; ++i) r.push_back(testsupport::random_vector(rng, 12, 1.5, 3.0));
    const auto s = piece_statistics(e, r, StandardizationKind::StandardScore);
    CHECK(s.reliability >= -1.0);
    CHECK(s.reliability <= 1.0);
    CHECK(s.validity_error >= 0.0);
    CHECK(s.validity_error <= 1.0);
    auto pe = e, pr = r;
    std::shuffle(pe.begin(), pe.end(), rng);
    std::shuffle(pr.begin(), pr.end(), rng);
    const auto t = piece_statistics(pe, pr, StandardizationKind::StandardScore);
    CHECK(t.validity_error == s.validity_error);
    CHECK(t.reliability == doctest::Approx(s.reliability).epsilon(1e-12));
  }
}

TEST_CASE("aggregates are unweighted means") {
  std::vector<PieceReport> pieces(3);
  const double rel[] = {1.0, 0.5, 0.0}, val[] = {0.0, 0.1, 0.5};
  for (int i = 0; i < 3; ++i) {
    pieces[i].stats.n_experts = 3 + 10 * i;
    pieces[i].stats.reliability = rel[i];
    pieces[i].stats.validity_error = val[i];
    pieces[i].stats.mean_mse_expert_expert = i;
    pieces[i].stats.mean_mse_expert_random = 2 * i;
    pieces[i].stats.mean_mse_random_random = 3 * i;
    pieces[i].stats.defined_bits = 10;
  }
  const auto a = aggregate_statistics(pieces);
  CHECK(a.reliability == doctest::Approx(0.5));
  CHECK(a.validity_error == doctest::Approx(0.2));
  CHECK(a.mean_mse_expert_expert == doctest::Approx(1.0));
  CHECK(a.mean_mse_random_random == doctest::Approx(3.0));
  CHECK(a.n_experts == 39);
  CHECK(a.defined_bits == 30);
}

TEST_CASE("excerpt scan ranks correlated windows first") {
  auto perf = [](const std::string& id, std::vector<int> second_half) {
    std::vector<AlignedNote> notes;
    const int first[] = {60, 70, 80, 90};
    for (int k = 0; k < 4; ++k)
      notes.push_back(note("m1_" + std::to_string(k), 60, 1, k, 1, 0.5 * k, 0.4, first[k] + (id == "b")));
    for (int k = 0; k < 4; ++k)
      notes.push_back(note("m2_" + std::to_string(k), 60, 2, 4 + k, 1, 2.0 + 0.5 * k, 0.4, second_half[k]));
    return testsupport::record(notes, id);
  };
  const auto a = perf("a", {60, 70, 80, 90});
  const auto b = perf("b", {90, 80, 70, 60});
  const PieceCorpus corpus("piece", {a, b}, a.onset_grid());
  const auto windows = excerpt_scan(corpus, FeatureKind::Velocity, 1, 4);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].start_measure == 1);
  CHECK(windows[0].mean_correlation == doctest::Approx(1.0));
  CHECK(windows[1].start_measure == 2);
  CHECK(windows[1].mean_correlation == doctest::Approx(-1.0));
  CHECK(windows[0].pairs == 1);
  CHECK(excerpt_scan(corpus, FeatureKind::Velocity, 2, 8).size() == 1);
  CHECK_THROWS_AS(excerpt_scan(corpus, FeatureKind::Velocity, 1, 5), NoExcerptError);

  const PieceCorpus same("piece", {a, perf("c", {60, 70, 80, 90}), perf("d", {60, 70, 80, 90})}, a.onset_grid());
  for (const auto& w : excerpt_scan(same, FeatureKind::Velocity, 1, 2))
    CHECK(w.mean_correlation == doctest::Approx(1.0));
}

TEST_CASE("experiment grid enumerates every cell") {
  const auto corpora = synthetic_corpora(5, 3);
  GridOptions o;
  o.randoms_per_piece = 6;
  o.seed = 9;
  const auto g = run_experiment_grid(corpora, o);
  CHECK(g.pieces == 5);
  CHECK(g.experiment_cells == 2 * 4 * kTestsPerCell * 5);
  CHECK(g.failed_cells == 0);
  REQUIRE(g.reports.size() == 8);
  std::size_t reports = 0;
  for (const auto& r : g.reports) {
    reports += r.per_piece.size();
    for (const auto& p : r.per_piece) CHECK(p.stats.defined_bits == p.stats.n_experts * (p.stats.n_experts - 1) * 6);
    const auto agg = aggregate_statistics(r.per_piece);
    CHECK(agg.reliability == r.aggregate.reliability);
  }
  CHECK(reports == 40);
  CHECK(g.report(FeatureKind::Tempo, StandardizationKind::Mean).feature == FeatureKind::Tempo);

  // randoms are shared across standardizations, so they match a direct draw
  const auto& first = corpora.front();
  const auto experts = corpus_features(first, FeatureKind::Tempo).values;
  const auto randoms = grid_randoms(experts, FeatureKind::Tempo, first.piece_id(), 6, 9);
  const auto direct = piece_statistics(experts, randoms, StandardizationKind::MeanLog);
  const auto& rep = g.report(FeatureKind::Tempo, StandardizationKind::MeanLog).per_piece.front();
  CHECK(rep.piece_id == first.piece_id());
  CHECK(rep.stats.reliability == direct.reliability);
  CHECK(rep.stats.mean_mse_expert_random == direct.mean_mse_expert_random);
}

TEST_CASE("grid results do not depend on threads or input order") {
  auto corpora = synthetic_corpora(6, 4);
  GridOptions o;
  o.randoms_per_piece = 5;
  o.seed = 1;
  o.threads = 1;
  const auto a = run_experiment_grid(corpora, o);
  o.threads = 4;
  std::reverse(corpora.begin(), corpora.end());
  const auto b = run_experiment_grid(corpora, o);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    REQUIRE(a.reports[i].per_piece.size() == b.reports[i].per_piece.size());
    for (std::size_t p = 0; p < a.reports[i].per_piece.size(); ++p) {
      const auto& x = a.reports[i].per_piece[p].stats;
      const auto& y = b.reports[i].per_piece[p].stats;
      CHECK(x.reliability == y.reliability);
      CHECK(x.validity_error == y.validity_error);
      CHECK(x.mean_mse_random_random == y.mean_mse_random_random);
    }
  }
}

TEST_CASE("grid records failing pieces and continues") {
  auto corpora = synthetic_corpora(2, 5);
  // a piece with only two performances cannot be evaluated
  const auto& src = corpora.front();
  corpora.emplace_back("tiny", std::vector<PerformanceRecord>{src.performances()[0], src.performances()[1]},
                       src.onset_grid());
  GridOptions o;
  o.randoms_per_piece = 3;
  const auto g = run_experiment_grid(corpora, o);
  CHECK(g.pieces == 3);
  CHECK(g.experiment_cells == 2 * 4 * 2 * 3);
  CHECK(g.failed_cells == 2 * 4 * 2);
  REQUIRE_FALSE(g.failures.empty());
  CHECK(g.failures.front().piece_id == "tiny");
  for (const auto& r : g.reports) CHECK(r.per_piece.size() == 2);
}
