// tests/selftrain-test.cc

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

#include <filesystem>
#include <mutex>
#include <set>

#include "prosody/synth.h"
#include "prosody/selftrain.h"

using namespace prosody;

namespace {

std::vector<Utterance> Synth(std::size_t n, const std::string &prefix, std::uint64_t seed) {
  SynthConfig s;
  s.n_utterances = n;
  s.vocab = "ABCD";
  s.lexicon_size = 6;
  s.min_words = 1;
  s.max_words = 3;
  s.feature_dim = 6;
  s.accent_dim = 5;
  s.n_stories = 4;
  s.id_prefix = prefix;
  s.seed = seed;
  return SynthCorpus(s);
}

std::vector<std::string> Ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("u" + std::to_string(i));
  return ids;
}

// Trainer whose predictor marks every frame accented; counts its calls.
struct FakeTrainer {
  std::shared_ptr<std::size_t> calls = std::make_shared<std::size_t>(0);
  std::shared_ptr<std::mutex> mu = std::make_shared<std::mutex>();
  bool fail = false;

  Trainer Get() {
    return [c = calls, m = mu, f = fail](const std::vector<LabeledUtterance> &,
                                          std::uint64_t) -> FramePredictor {
      std::lock_guard<std::mutex> lock(*m);
      ++*c;
      if (f && *c > 1) throw std::runtime_error("boom");
      return [](const Utterance &u) {
        return FrameTrack{u.frame_period, std::vector<double>(u.num_frames(), 0.9)};
      };
    };
  }
};

// Scorer that replays a fixed sequence of dev F1 values.
DevScorer Scripted(std::vector<double> values) {
  auto pos = std::make_shared<std::size_t>(0);
  return [values, pos](const FramePredictor &) {
    return values.at(std::min((*pos)++, values.size() - 1));
  };
}

struct Data {
  std::vector<Utterance> lab = Synth(9, "lab", 1), pool = Synth(4, "pool", 2);
  std::vector<LabeledUtterance> labeled;
  std::vector<const Utterance *> unlabeled;
  std::map<std::string, FrameTrack> initial;

  Data() {
    for (const auto &u : lab)
      labeled.push_back({&u, EventsToFrames(u.accents, u.duration, u.frame_period)});
    for (const auto &u : pool) {
      unlabeled.push_back(&u);
      initial[u.id] = FrameTrack{u.frame_period, std::vector<double>(u.num_frames(), 0.0)};
    }
  }
};

}  // namespace

TEST_CASE("fold partition sizes") {
  const FoldAssignment a = PartitionFolds(Ids(9), 1);
  CHECK(a.Sizes() == std::vector<std::size_t>{3, 3, 3});
  const FoldAssignment b = PartitionFolds(Ids(10), 1);
  CHECK(b.Sizes() == std::vector<std::size_t>{4, 3, 3});
  CHECK(PartitionFolds(Ids(10), 1).fold == b.fold);
  CHECK_THROWS_AS(PartitionFolds(Ids(2), 1), ConfigError);
  for (std::size_t n = 3; n < 40; ++n) {
    const auto sizes = PartitionFolds(Ids(n), n).Sizes();
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("folds keep stories together when balance allows") {
  std::vector<std::string> ids = Ids(12), stories;
  for (std::size_t i = 0; i < 12; ++i) stories.push_back("s" + std::to_string(i / 2));
  const FoldAssignment a = PartitionFolds(ids, 3, 3, stories);
  CHECK(a.story_disjoint);
  for (std::size_t i = 0; i < 12; i += 2) CHECK(a.fold[i] == a.fold[i + 1]);
  // One story holding most utterances cannot be balanced.
  std::vector<std::string> lopsided(12, "big");
  lopsided[11] = "small";
  const FoldAssignment b = PartitionFolds(ids, 3, 3, lopsided);
  CHECK(!b.story_disjoint);
  CHECK(b.Sizes() == std::vector<std::size_t>{4, 4, 4});
}

TEST_CASE("majority vote") {
  const FrameTrack one{0.02, {1, 1, 0}}, two{0.02, {1, 0, 0}}, three{0.02, {0, 1, 0}};
  CHECK(Vote(one, two, three).values == std::vector<double>{1, 1, 0});
  CHECK(Vote(one, one, one).values == one.values);
  const FrameTrack zero{0.02, {0, 0, 0}};
  CHECK(Vote(zero, zero, one).values == zero.values);
  CHECK_THROWS_AS(Vote(one, two, FrameTrack{0.02, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Vote(one, two, FrameTrack{0.01, {1, 0, 0}}), std::invalid_argument);
  CHECK(Binarize(FrameTrack{0.02, {0.2, 0.5, 0.7}}).values == std::vector<double>{0, 1, 1});
}

TEST_CASE("halting when the gain falls below epsilon") {
  const Data d;
  FakeTrainer t;
  SelfTrainOptions o;
  o.max_iters = 10;
  o.epsilon = 0.01;
  SelfTrainState s = InitSelfTrain(d.labeled, d.unlabeled, d.initial, t.Get(),
                                   Scripted({0.5, 0.6, 0.605}), o);
  CHECK(s.best_dev_f1 == 0.5);
  s = RunSelfTrain(std::move(s), d.labeled, d.unlabeled, t.Get(), Scripted({0.6, 0.605}));
  CHECK(s.halted);
  CHECK(s.iteration == 2);
  CHECK(s.best_dev_f1 == 0.6);
  REQUIRE(s.history.size() == 3);
  CHECK(s.history[1].accepted);
  CHECK(!s.history[2].accepted);
  // The rejected iteration leaves the accepted labels in place.
  CHECK(s.pseudo_labels.at(d.pool[0].id).values == s.history[1].pseudo_labels.at(d.pool[0].id).values);
  for (const auto &[id, track] : s.pseudo_labels)
    for (double v : track.values) CHECK(v == 1.0);
  // Each iteration trains three fold models and one full model.
  CHECK(*t.calls == 1 + 4 * 2);
  CHECK_THROWS_AS(SelfTrainIterate(s, d.labeled, d.unlabeled, t.Get(), Scripted({1.0})),
                  std::logic_error);
}

TEST_CASE("max_iters bounds the loop and best F1 never drops") {
  const Data d;
  FakeTrainer t;
  SelfTrainOptions o;
  o.max_iters = 3;
  o.parallel_folds = false;
  SelfTrainState s = InitSelfTrain(d.labeled, d.unlabeled, d.initial, t.Get(),
                                   Scripted({0.1}), o);
  s = RunSelfTrain(std::move(s), d.labeled, d.unlabeled, t.Get(), Scripted({0.2, 0.3, 0.4, 0.5}));
  CHECK(s.halted);
  CHECK(s.iteration == 3);
  CHECK(s.best_dev_f1 == doctest::Approx(0.4));
  CHECK(s.diagnostic == "reached max_iters");
  double prev = -1;
  for (const auto &r : s.history) {
    CHECK(r.dev_f1 >= prev);
    prev = r.dev_f1;
  }
  o.max_iters = 0;
  CHECK(InitSelfTrain(d.labeled, d.unlabeled, d.initial, t.Get(), Scripted({0.1}), o).halted);
}

TEST_CASE("a failing trainer halts with a diagnostic") {
  const Data d;
  FakeTrainer t;
  t.fail = true;
  SelfTrainState s = InitSelfTrain(d.labeled, d.unlabeled, d.initial, t.Get(), Scripted({0.3}));
  s = SelfTrainIterate(std::move(s), d.labeled, d.unlabeled, t.Get(), Scripted({0.9}));
  CHECK(s.halted);
  CHECK(s.diagnostic.find("boom") != std::string::npos);
  CHECK(s.best_dev_f1 == 0.3);
  CHECK(s.pseudo_labels.at(d.pool[0].id).values == d.initial.at(d.pool[0].id).values);
}

TEST_CASE("labeled and unlabeled sets must be disjoint") {
  const Data d;
  FakeTrainer t;
  std::vector<const Utterance *> overlap = d.unlabeled;
  overlap.push_back(d.labeled[0].utterance);
  CHECK_THROWS_AS(InitSelfTrain(d.labeled, overlap, d.initial, t.Get(), Scripted({0.1})),
                  std::invalid_argument);
}

TEST_CASE("checkpoint files") {
  const Data d;
  FakeTrainer t;
  SelfTrainOptions o;
  o.max_iters = 1;
  SelfTrainState s = InitSelfTrain(d.labeled, d.unlabeled, d.initial, t.Get(), Scripted({0.1}), o);
  s = RunSelfTrain(std::move(s), d.labeled, d.unlabeled, t.Get(), Scripted({0.2}));
  const auto dir = std::filesystem::temp_directory_path() / "prosody-selftrain-test";
  std::filesystem::remove_all(dir);
  WriteSelfTrainCheckpoint(dir.string(), s);
  CHECK(std::filesystem::exists(dir / "state.json"));
  CHECK(std::filesystem::exists(dir / "pseudo_labels_iter0.tsv"));
  CHECK(std::filesystem::exists(dir / "pseudo_labels_iter1.tsv"));
}
