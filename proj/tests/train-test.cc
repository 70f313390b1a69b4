// tests/train-test.cc

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "prosody/synth.h"
#include "prosody/train.h"

using namespace prosody;

namespace {

SynthConfig SmallSynth(double noise, std::uint64_t seed = 1) {
  SynthConfig s;
  s.n_utterances = 12;
  s.vocab = "ABCD";
  s.lexicon_size = 6;
  s.min_words = 1;
  s.max_words = 3;
  s.feature_dim = 6;
  s.accent_dim = 5;
  s.n_stories = 4;
  s.noise_level = noise;
  s.seed = seed;
  return s;
}

struct Fixture {
  std::vector<Utterance> corpus;
  Vocabulary vocab{" ABCD"};
  ModelDims dims;
  std::vector<TrainExample> data;

  explicit Fixture(double noise = 0.3) : corpus(SynthCorpus(SmallSynth(noise))) {
    dims = ModelDims{6, 8, vocab.size()};
    for (const auto &u : corpus) data.push_back(MakeExample(u, vocab));
  }
};

bool SameBlocks(const JointModel &a, const JointModel &b, ParamGroup group) {
  for (const auto &blk : a.layout().blocks()) {
    if (blk.group != group) continue;
    for (std::size_t i = blk.offset; i < blk.offset + blk.size(); ++i)
      if (a.params()[i] != b.params()[i]) return false;
  }
  return true;
}

double Mean(const std::vector<StepLoss> &h, std::size_t from, std::size_t to) {
  double s = 0;
  for (std::size_t i = from; i < to; ++i) s += h[i].l_j;
  return s / (to - from);
}

}  // namespace

TEST_CASE("config validation and freeze steps") {
  TrainConfig c;
  CHECK_NOTHROW(c.Validate());
  c.steps = 7;
  c.freeze_fraction = 0.5;
  CHECK(c.FreezeSteps() == 3);
  c.freeze_fraction = 1.0;
  CHECK(c.FreezeSteps() == 7);
  c.freeze_fraction = 0.0;
  CHECK(c.FreezeSteps() == 0);
  c.freeze_fraction = 1.5;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = TrainConfig{};
  c.lambda = -1;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
}

TEST_CASE("cosine learning rate") {
  TrainConfig c;
  c.steps = 100;
  c.learning_rate = 0.4;
  CHECK(LearningRate(c, 0) == doctest::Approx(0.4));
  CHECK(LearningRate(c, 50) == doctest::Approx(0.2));
  for (std::size_t s = 1; s < 100; ++s) CHECK(LearningRate(c, s) <= LearningRate(c, s - 1));
  CHECK(LearningRate(c, 99) >= 0.0);
}

TEST_CASE("full freeze leaves the encoder and input projection untouched") {
  const Fixture f;
  const JointModel init = JointModel::Random(f.dims, 3);
  TrainConfig c;
  c.steps = 30;
  c.freeze_fraction = 1.0;
  const JointModel m = Train(init, f.data, c).model;
  CHECK(SameBlocks(init, m, ParamGroup::kInput));
  CHECK(SameBlocks(init, m, ParamGroup::kEncoder));
  CHECK(!SameBlocks(init, m, ParamGroup::kAsrHead));
  CHECK(!SameBlocks(init, m, ParamGroup::kProsodyHead));

  c.freeze_fraction = 0.5;
  const JointModel half = Train(init, f.data, c).model;
  CHECK(SameBlocks(init, half, ParamGroup::kInput));
  CHECK(!SameBlocks(init, half, ParamGroup::kEncoder));
}

TEST_CASE("training lowers the joint loss on clean data") {
  const Fixture f(0.0);
  TrainConfig c;
  c.steps = 2000;
  c.seed = 5;
  const auto h = Train(JointModel::Random(f.dims, 1), f.data, c).history;
  REQUIRE(h.size() == 2000);
  CHECK(Mean(h, h.size() - 20, h.size()) < Mean(h, 0, 20));
  for (const auto &s : h) CHECK(s.l_j == doctest::Approx(s.l_asr + c.lambda * s.l_pad));
}

TEST_CASE("same seed gives the same run") {
  const Fixture f;
  TrainConfig c;
  c.steps = 40;
  c.seed = 9;
  const JointModel init = JointModel::Random(f.dims, 2);
  const TrainResult a = Train(init, f.data, c), b = Train(init, f.data, c);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].l_j == b.history[i].l_j);
  CHECK(a.model.params() == b.model.params());
}

TEST_CASE("lambda zero makes ASR training blind to prosody labels") {
  const Fixture f;
  std::vector<TrainExample> flipped = f.data;
  for (auto &ex : flipped)
    for (auto &v : ex.labels.values) v = 1.0 - v;
  TrainConfig c;
  c.steps = 40;
  c.lambda = 0.0;
  c.freeze_fraction = 0.0;
  const JointModel init = JointModel::Random(f.dims, 4);
  const TrainResult a = Train(init, f.data, c), b = Train(init, flipped, c);
  for (std::size_t i = 0; i < a.history.size(); ++i)
    CHECK(a.history[i].l_asr == b.history[i].l_asr);
  CHECK(SameBlocks(a.model, b.model, ParamGroup::kEncoder));
  CHECK(SameBlocks(a.model, b.model, ParamGroup::kAsrHead));
}

TEST_CASE("batch gradient ignores batch order") {
  const Fixture f;
  const JointModel m = JointModel::Random(f.dims, 6);
  std::vector<const TrainExample *> batch;
  for (std::size_t i = 0; i < 5; ++i) batch.push_back(&f.data[i]);
  const LossGradient a = BatchLossGradient(m, batch, 1.0, ProsodyLossKind::kMse);
  std::reverse(batch.begin(), batch.end());
  const LossGradient b = BatchLossGradient(m, batch, 1.0, ProsodyLossKind::kMse);
  CHECK(a.loss.l_j == doctest::Approx(b.loss.l_j).epsilon(1e-12));
  for (std::size_t i = 0; i < a.grad.size(); ++i)
    CHECK(a.grad[i] == doctest::Approx(b.grad[i]).epsilon(1e-9));
}

TEST_CASE("training errors") {
  Fixture f;
  const JointModel init = JointModel::Random(f.dims, 7);
  CHECK_THROWS_AS(Train(init, {}, TrainConfig{}), std::invalid_argument);
  f.data[0].features[0] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig c;
  c.steps = 20;
  c.batch_size = f.data.size();
  CHECK_THROWS_AS(Train(init, f.data, c), DivergenceError);
}

TEST_CASE("MakeExample checks its inputs") {
  const Fixture f;
  const Utterance &u = f.corpus[0];
  const TrainExample ex = MakeExample(u, f.vocab);
  CHECK(ex.frames == u.num_frames());
  CHECK(ex.labels.size() == ex.frames);
  CHECK(f.vocab.Decode(ex.target) == u.transcript_norm);
  const FrameTrack short_track{u.frame_period, {0.0}};
  CHECK_THROWS_AS(MakeExample(u, f.vocab, &short_track), std::invalid_argument);
  CHECK_THROWS_AS(MakeExample(u, Vocabulary(" AB"), nullptr), std::invalid_argument);
}

TEST_CASE("train log format") {
  const auto path = (std::filesystem::temp_directory_path() / "prosody-train-log.csv").string();
  WriteTrainLog(path, {{0, 1.5, 0.25, 1.75}, {1, 1.0, 0.5, 1.5}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,l_asr,l_pad,l_j");
  std::getline(in, line);
  CHECK(line == "0,1.5,0.25,1.75");
}
