// tests/metrics-test.cc

// Copyright 2026  The prosody-asr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "oracles.h"
#include "prosody/metrics.h"

using namespace prosody;

namespace {

EventSet Points(std::initializer_list<double> centers) {
  std::vector<AccentEvent> v;
  for (double c : centers) v.push_back({c, c});
  return EventSet(v);
}

// Events on a 10 ms grid, so that offsets often land exactly on a tolerance.
EventSet RandomEvents(std::mt19937_64 &rng, std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> n(0, max_n);
  std::uniform_int_distribution<int> slot(0, 60), half(0, 5);
  std::vector<AccentEvent> v;
  for (std::size_t k = n(rng); k > 0; --k) {
    const double c = slot(rng) * 0.01, h = half(rng) * 0.01;
    v.push_back({c - h + 1.0, c + h + 1.0});
  }
  return EventSet(v);
}

std::vector<double> Centers(const EventSet &s) {
  std::vector<double> out;
  for (const auto &e : s.events()) out.push_back(e.Center());
  return out;
}

std::vector<int> RandomSeq(std::mt19937_64 &rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, 2);
  std::vector<int> v(len(rng));
  for (auto &x : v) x = sym(rng);
  return v;
}

}  // namespace

TEST_CASE("MatchEvents examples") {
  MatchResult m = MatchEvents(Points({1.00}), Points({1.03}), 40);
  CHECK(m.pairs.size() == 1);
  CHECK(m.tp == 1);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
  CHECK(MatchEvents(Points({1.00}), Points({1.03}), 0).pairs.empty());
  m = MatchEvents(Points({1.00, 1.05}), Points({1.04}), 50);
  CHECK(m.tp == 1);
  CHECK(oracle::MaxMatching({1.00, 1.05}, {1.04}, 50) == 1);
  CHECK(m.fn == 1);
  // Inclusive boundary.
  CHECK(MatchEvents(Points({1.00}), Points({1.04}), 40).tp == 1);
}

TEST_CASE("MatchEvents rejects unsorted input") {
  std::vector<AccentEvent> unsorted = {{0.5, 0.5}, {0.1, 0.1}};
  std::vector<AccentEvent> sorted = {{0.1, 0.1}};
  CHECK_THROWS_AS(MatchEvents(unsorted, sorted, 40), std::invalid_argument);
  CHECK_THROWS_AS(MatchEvents(sorted, unsorted, 40), std::invalid_argument);
}

TEST_CASE("onset anchoring") {
  // Centers 100 ms apart but onsets equal.
  EventSet ref({{1.0, 1.2}}), hyp({{1.0, 1.0}});
  CHECK(MatchEvents(ref, hyp, 40, MatchAnchor::kCenter).tp == 0);
  CHECK(MatchEvents(ref, hyp, 0, MatchAnchor::kOnset).tp == 1);
}

TEST_CASE("MatchEvents is a maximum one-to-one matching") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const EventSet ref = RandomEvents(rng, 6), hyp = RandomEvents(rng, 6);
    for (double tol : {0.0, 40.0, 80.0, 100.0}) {
      const MatchResult m = MatchEvents(ref, hyp, tol);
      REQUIRE(m.tp == oracle::MaxMatching(Centers(ref), Centers(hyp), tol));
      std::set<std::size_t> r, h;
      for (auto [i, j] : m.pairs) {
        CHECK(r.insert(i).second);
        CHECK(h.insert(j).second);
        CHECK(std::abs(ref[i].Center() - hyp[j].Center()) <= tol / 1000 + 1e-9);
      }
      CHECK(m.tp == m.pairs.size());
      CHECK(m.fp == hyp.size() - m.tp);
      CHECK(m.fn == ref.size() - m.tp);
    }
  }
}

TEST_CASE("Prf examples") {
  PrfReport r = Prf(1, 0, 1);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 0.5);
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  r = Prf(0, 0, 0);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  r = Prf(7, 0, 0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
}

TEST_CASE("ToleranceSweep examples and monotonicity") {
  const EventSet ref = Points({0.5, 1.0, 2.0});
  for (const auto &row : ToleranceSweep(ref, ref)) {
    CHECK(row.precision == 1.0);
    CHECK(row.recall == 1.0);
    CHECK(row.f1 == 1.0);
  }
  for (const auto &row : ToleranceSweep(ref, EventSet())) CHECK(row.f1 == 0.0);

  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 1000; ++trial) {
    const EventSet a = RandomEvents(rng, 8), b = RandomEvents(rng, 8);
    const auto rows = ToleranceSweep(a, b);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].tp == oracle::MaxMatching(Centers(a), Centers(b), rows[i].tolerance_ms));
      for (double v : {rows[i].precision, rows[i].recall, rows[i].f1})
        CHECK((v >= 0.0 && v <= 1.0));
      if (i > 0) REQUIRE(rows[i].f1 >= rows[i - 1].f1);
    }
  }
}

TEST_CASE("ScoringConfig validation") {
  ScoringConfig c;
  CHECK_NOTHROW(c.Validate());
  c.tolerances_ms = {40, 0};
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c.tolerances_ms = {-1};
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
}

TEST_CASE("EditDistance examples") {
  const std::string kitten = "kitten", sitting = "sitting";
  CHECK(EditDistance(kitten, sitting).errors() == 3);
  CHECK(oracle::RecursiveEdit(kitten, sitting).total == 3);
  CHECK(EditDistance(kitten, kitten).errors() == 0);
  const ErrorRateReport r = EditDistance(std::string(), std::string("abcd"));
  CHECK(r.insertions == 4);
  CHECK(r.errors() == 4);
}

TEST_CASE("EditDistance agrees with the recursive oracle") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = RandomSeq(rng, 8), b = RandomSeq(rng, 8);
    const ErrorRateReport r = EditDistance(a, b);
    const auto o = oracle::RecursiveEdit(a, b);
    REQUIRE(r.errors() == o.total);
    CHECK(r.substitutions == o.sub);
    CHECK(r.insertions == o.ins);
    CHECK(r.deletions == o.del);
    if (a.size() + b.size() <= 10) CHECK(o.total == oracle::NaiveEditCost(a, b, a.size(), b.size()));
  }
}

TEST_CASE("EditDistance metric properties") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = RandomSeq(rng, 8), b = RandomSeq(rng, 8), c = RandomSeq(rng, 8);
    const auto d = [](const std::vector<int> &x, const std::vector<int> &y) {
      return EditDistance(x, y).errors();
    };
    CHECK(d(a, a) == 0);
    CHECK(d(a, b) == d(b, a));
    CHECK(d(a, c) <= d(a, b) + d(b, c));
  }
}

TEST_CASE("Wer and Cer examples") {
  CHECK(Wer("THE CAT SAT", "THE CAT").rate == doctest::Approx(1.0 / 3.0));
  CHECK(Wer("THE CAT SAT", "THE CAT SAT").rate == 0.0);
  const ErrorRateReport swap = Wer("A B", "B A");
  CHECK(swap.rate == 1.0);
  CHECK(oracle::RecursiveEdit(std::vector<std::string>{"A", "B"},
                              std::vector<std::string>{"B", "A"}).total == 2);
  CHECK(Cer("AB", "AC").rate == 0.5);
  CHECK(Cer("AB", "AB").rate == 0.0);
  CHECK(Cer("ABC", "").rate == 1.0);
  CHECK(Wer("", "X Y").rate == 2.0);
  CHECK(Wer("", "").rate == 0.0);
  CHECK(Cer("A B", "AB").deletions == 1);
}

TEST_CASE("Wer and Cer ignore a shared suffix") {
  std::mt19937_64 rng(41);
  const std::string words[] = {"A", "BB", "C"};
  auto sentence = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i)
      s += (i ? " " : "") + words[std::uniform_int_distribution<int>(0, 2)(rng)];
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const std::string ref = sentence(1 + trial % 5), hyp = sentence(trial % 6);
    const std::string suffix = sentence(1 + trial % 3);
    const auto w0 = Wer(ref, hyp), w1 = Wer(ref + " " + suffix, hyp + " " + suffix);
    CHECK(w0.errors() == w1.errors());
    if (!hyp.empty()) CHECK(Cer(ref, hyp).errors() == Cer(ref + " " + suffix, hyp + " " + suffix).errors());
  }
}

TEST_CASE("Accumulate pools counts") {
  const ErrorRateReport a = Wer("A B", "A"), b = Wer("C D E", "C X E");
  const ErrorRateReport t = Accumulate({a, b});
  CHECK(t.ref_length == 5);
  CHECK(t.errors() == 2);
  CHECK(t.rate == doctest::Approx(0.4));
}
