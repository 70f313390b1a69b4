// tests/ngram-test.cc

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

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "prosody/ngram.h"

using namespace prosody;

namespace {

// Add-one estimate of P(next | history) counted directly from the strings,
// with '^' padding on the left and '$' marking the end (orders >= 2).
double CountedProb(const std::vector<std::string> &texts, std::size_t n,
                   const std::string &alphabet, const std::string &history,
                   char next) {
  const std::string pad(n - 1, '^');
  std::string ctx = (pad + history).substr((pad + history).size() - (n - 1));
  double hits = 0, total = 0;
  for (const auto &t : texts) {
    const std::string s = pad + t + (n >= 2 ? "$" : "");
    for (std::size_t i = n - 1; i < s.size(); ++i) {
      if (s.compare(i - (n - 1), n - 1, ctx) != 0) continue;
      ++total;
      if (s[i] == next) ++hits;
    }
  }
  const double outcomes = alphabet.size() + (n >= 2 ? 1 : 0);
  return (hits + 1) / (total + outcomes);
}

}  // namespace

TEST_CASE("unigram add-one example") {
  const NGramLm lm = TrainNGram({"AAB"}, 1, "AB");
  CHECK(std::exp(lm.LogProb("", 'A')) == doctest::Approx(0.6));
  CHECK(std::exp(lm.LogProb("B", 'B')) == doctest::Approx(0.4));
  CHECK(lm.LogProbEnd("AB") == 0.0);
  CHECK(lm.NumOutcomes() == 2);
}

TEST_CASE("unseen bigram context is uniform") {
  const NGramLm lm = TrainNGram({"AB"}, 2, "ABC");
  for (char c : std::string("ABC")) CHECK(std::exp(lm.LogProb("C", c)) == doctest::Approx(0.25));
  CHECK(std::exp(lm.LogProbEnd("C")) == doctest::Approx(0.25));
}

TEST_CASE("probabilities match direct counting") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "AB C";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 8);
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::string> texts(6);
    for (auto &t : texts)
      for (std::size_t k = len(rng); k > 0; --k) t += alphabet[pick(rng)];
    const NGramLm lm = TrainNGram(texts, n, alphabet);
    for (int trial = 0; trial < 40; ++trial) {
      std::string h;
      for (std::size_t k = len(rng); k > 0; --k) h += alphabet[pick(rng)];
      for (char c : alphabet)
        CHECK(std::exp(lm.LogProb(h, c)) ==
              doctest::Approx(CountedProb(texts, n, alphabet, h, c)).epsilon(1e-12));
      if (n >= 2)
        CHECK(std::exp(lm.LogProbEnd(h)) ==
              doctest::Approx(CountedProb(texts, n, alphabet, h, '$')).epsilon(1e-12));
      const auto dist = lm.Distribution(h);
      REQUIRE(dist.size() == lm.NumOutcomes());
      CHECK(std::abs(std::accumulate(dist.begin(), dist.end(), 0.0) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("training errors") {
  CHECK_THROWS_AS(TrainNGram({"A"}, 0), std::invalid_argument);
  CHECK_THROWS_AS(TrainNGram({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(TrainNGram({"AX"}, 2, "A"), std::invalid_argument);
  CHECK(TrainNGram({"BA"}, 2).alphabet() == "AB");
}

TEST_CASE("save and load") {
  const NGramLm lm = TrainNGram({"ABBA", "BAB A"}, 3);
  const auto path = (std::filesystem::temp_directory_path() / "prosody-ngram-test.json").string();
  lm.Save(path);
  const NGramLm back = NGramLm::Load(path);
  CHECK(back.order() == 3);
  CHECK(back.alphabet() == lm.alphabet());
  CHECK(back.ToJson() == lm.ToJson());
  for (const std::string h : {"", "A", "AB", "BA B"})
    for (char c : lm.alphabet()) CHECK(back.LogProb(h, c) == lm.LogProb(h, c));
  CHECK_THROWS(NGramLm::FromJson("{\"order\": 2}"));
  CHECK_THROWS(NGramLm::FromJson("not json"));
}

TEST_CASE("CharLmScorer bridges token ids to characters") {
  const NGramLm lm = TrainNGram({"AB BA", "AAB"}, 3, " AB");
  const Vocabulary vocab(" AB");
  const CharLmScorer scorer(lm, vocab);
  const LabelSeq hist = vocab.Encode("AB B");
  CHECK(scorer.LogProb(hist, vocab.Encode("A")[0]) == lm.LogProb("AB B", 'A'));
  CHECK(scorer.LogProbEnd(hist) == lm.LogProbEnd("AB B"));
  CHECK(scorer.LogProb({}, 2) == lm.LogProb("", 'A'));
  CHECK_THROWS_AS(CharLmScorer(lm, Vocabulary("ABC")), std::invalid_argument);
}
