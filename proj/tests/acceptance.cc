// tests/acceptance.cc

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

// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

#include "oracles.h"
#include "prosody/corpus.h"
#include "prosody/ctc.h"
#include "prosody/metrics.h"
#include "prosody/model.h"
#include "prosody/selftrain.h"
#include "prosody/synth.h"
#include "prosody/train.h"

using namespace prosody;
namespace fs = std::filesystem;

namespace {

constexpr double kCtcTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kCtcSeconds = 10, kGradSeconds = 60, kMatchSeconds = 10,
                 kSweepSeconds = 10, kEditSeconds = 30;
constexpr double kJointSecondsPerSeed = 600, kSelfTrainSeconds = 900;
constexpr int kJointSeeds = 5, kJointWinsNeeded = 4;
constexpr std::size_t kMaxIters = 10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Run(const std::string &name, double limit_s, const std::function<Outcome()> &fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += " (over the time limit)";
  }
  if (!o.pass) ++failures;
  std::printf("%s %-28s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string Fmt(const char *f, double a, double b = 0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

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

Outcome CtcOracle() {
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t T = 1 + i % 4, V = 2 + i % 2;
    const LogProbGrid g = oracle::RandomGrid(T, V, rng);
    LabelSeq target(std::uniform_int_distribution<std::size_t>(0, 2)(rng));
    for (auto &x : target) x = std::uniform_int_distribution<int>(1, V - 1)(rng);
    const double want = oracle::CtcNll(g, target);
    const CtcLoss got = CtcForward(g, target);
    if (std::isinf(want) != !got.feasible()) return {false, "feasibility mismatch"};
    if (!std::isinf(want)) worst = std::max(worst, std::abs(got.nll - want));
  }
  return {worst < kCtcTol, Fmt("max |diff| = %.2e", worst)};
}

Outcome GradientFidelity() {
  std::mt19937_64 rng(102);
  std::normal_distribution<double> n(0, 1);
  double worst_ctc = 0, worst_model = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t T = 1 + i % 6, V = 2 + i % 4;
    std::vector<double> logits(T * V);
    for (auto &x : logits) x = n(rng);
    LabelSeq target(std::uniform_int_distribution<std::size_t>(0, 3)(rng));
    for (auto &x : target) x = std::uniform_int_distribution<int>(1, V - 1)(rng);
    while (MinCtcFrames(target) > T) target.pop_back();
    const CtcGradient g = CtcGrad(LogProbGrid::FromLogits(T, V, logits), target);
    const auto fd = oracle::CtcFiniteDifference(T, V, logits, target);
    for (std::size_t k = 0; k < fd.size(); ++k)
      worst_ctc = std::max(worst_ctc, std::abs(g.grad[k] - fd[k]) /
                                          std::max({std::abs(g.grad[k]), std::abs(fd[k]), 1e-6}));

    const ModelDims d{4, 6, V};
    const JointModel m = JointModel::Random(d, 200 + i);
    TrainExample ex;
    ex.frames = T + 2;
    ex.features.resize(ex.frames * d.input_dim);
    for (auto &x : ex.features) x = static_cast<float>(n(rng));
    ex.labels.values.resize(ex.frames);
    for (auto &v : ex.labels.values) v = rng() % 2;
    ex.target = target;
    GradCheckOptions o;
    o.seed = i;
    o.kind = i % 2 ? ProsodyLossKind::kBce : ProsodyLossKind::kMse;
    worst_model = std::max(worst_model, GradCheck(m, ex, o));
  }
  return {worst_ctc < kGradTol && worst_model < kGradTol,
          Fmt("ctc_grad %.2e, grad_check %.2e", worst_ctc, worst_model)};
}

Outcome MatchingOptimality() {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 500; ++i) {
    const EventSet ref = RandomEvents(rng, 6), hyp = RandomEvents(rng, 6);
    for (double tol : {0.0, 40.0, 80.0, 100.0})
      if (MatchEvents(ref, hyp, tol).tp != oracle::MaxMatching(Centers(ref), Centers(hyp), tol))
        return {false, "instance " + std::to_string(i)};
  }
  return {true, "500 instances x 4 tolerances"};
}

Outcome ToleranceMonotonicity() {
  std::mt19937_64 rng(104);
  for (int i = 0; i < 1000; ++i) {
    const auto rows = ToleranceSweep(RandomEvents(rng, 8), RandomEvents(rng, 8));
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (rows[k].f1 < rows[k - 1].f1) return {false, "pair " + std::to_string(i)};
  }
  return {true, "1000 pairs"};
}

Outcome EditOracle() {
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<std::size_t> len(0, 8);
  std::uniform_int_distribution<int> sym(0, 2);
  for (int i = 0; i < 1000; ++i) {
    std::vector<int> a(len(rng)), b(len(rng));
    for (auto &x : a) x = sym(rng);
    for (auto &x : b) x = sym(rng);
    const ErrorRateReport r = EditDistance(a, b);
    const auto o = oracle::RecursiveEdit(a, b);
    if (r.substitutions != o.sub || r.insertions != o.ins || r.deletions != o.del)
      return {false, "pair " + std::to_string(i)};
  }
  return {true, "1000 pairs"};
}

Outcome JointDirection() {
  SynthConfig sc;
  sc.n_utterances = 240;
  sc.noise_level = 0.8;
  sc.seed = 11;
  const auto corpus = SynthCorpus(sc);
  const Vocabulary vocab(" " + sc.vocab);
  std::vector<TrainExample> train, dev;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    (i < 200 ? train : dev).push_back(MakeExample(corpus[i], vocab));
  int wins = 0;
  std::string detail;
  for (int seed = 0; seed < kJointSeeds; ++seed) {
    double wer[2];
    for (int j = 0; j < 2; ++j) {
      TrainConfig cfg;
      cfg.steps = 2000;
      cfg.lambda = j;
      cfg.seed = seed;
      const JointModel m =
          Train(JointModel::Random(ModelDims{sc.feature_dim, 32, vocab.size()}, seed), train, cfg).model;
      std::vector<ErrorRateReport> w;
      for (std::size_t i = 0; i < dev.size(); ++i)
        w.push_back(Wer(corpus[200 + i].transcript_norm,
                        vocab.Decode(GreedyDecode(m.Forward(dev[i].features, dev[i].frames).asr))));
      wer[j] = Accumulate(w).rate;
    }
    if (wer[1] <= wer[0]) ++wins;
    detail += Fmt("%.3f/%.3f ", wer[1], wer[0]);
  }
  return {wins >= kJointWinsNeeded,
          std::to_string(wins) + "/" + std::to_string(kJointSeeds) + " seeds; joint/asr " + detail};
}

Outcome SelfTrainGain() {
  SynthConfig sc;
  sc.n_utterances = 60;
  sc.seed = 21;
  sc.id_prefix = "lab";
  const auto lab = SynthCorpus(sc);
  sc.n_utterances = 120;
  sc.seed = 22;
  sc.id_prefix = "pool";
  const auto pool = SynthCorpus(sc);
  sc.n_utterances = 40;
  sc.seed = 23;
  sc.id_prefix = "dev";
  const auto dev = SynthCorpus(sc);
  const Vocabulary vocab(" " + sc.vocab);

  std::vector<LabeledUtterance> labeled;
  for (const auto &u : lab) labeled.push_back({&u, EventsToFrames(u.accents, u.duration)});
  std::vector<const Utterance *> unlabeled, dv;
  for (const auto &u : pool) unlabeled.push_back(&u);
  for (const auto &u : dev) dv.push_back(&u);
  std::mt19937_64 rng(5);
  std::bernoulli_distribution flip(0.3);
  std::map<std::string, FrameTrack> noisy;
  for (const auto &u : pool) {
    FrameTrack t = EventsToFrames(u.accents, u.duration);
    for (auto &v : t.values)
      if (flip(rng)) v = 1 - v;
    noisy[u.id] = t;
  }
  TrainConfig cfg;
  cfg.steps = 1000;
  const Trainer trainer = MakeJointTrainer(vocab, ModelDims{sc.feature_dim, 32, vocab.size()}, cfg);
  const DevScorer scorer = MakeDevScorer(dv);
  SelfTrainOptions opts;
  opts.max_iters = kMaxIters;
  SelfTrainState s = InitSelfTrain(labeled, unlabeled, noisy, trainer, scorer, opts);
  s = RunSelfTrain(std::move(s), labeled, unlabeled, trainer, scorer);
  const double f0 = s.history.front().dev_f1;
  return {s.halted && s.iteration <= kMaxIters && s.best_dev_f1 > f0,
          Fmt("F1 %.3f -> %.3f", f0, s.best_dev_f1) + ", halted after " +
              std::to_string(s.iteration) + " iterations (" + s.diagnostic + ")"};
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome Determinism() {
  const fs::path dir = fs::temp_directory_path() / "prosody-acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cfg = std::string(PROSODY_SOURCE_DIR) + "/tests/fixtures/tiny.ini";
  for (const std::string run : {"a", "b"})
    for (const char *cmd : {"prepare", "train", "decode", "score", "selftrain", "report"}) {
      const std::string line = "cd '" + dir.string() + "' && '" + PROSODY_CLI + "' " + cmd +
                               " --config '" + cfg + "' --out " + run + " >/dev/null 2>&1";
      const int rc = std::system(line.c_str());
      if (!WIFEXITED(rc) || WEXITSTATUS(rc) != 0)
        return {false, std::string(cmd) + " failed in run " + run};
    }
  std::size_t files = 0;
  for (const auto &e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    if (Slurp(e.path()) != Slurp(dir / "b" / rel)) return {false, rel.string() + " differs"};
    ++files;
  }
  return {files > 0, std::to_string(files) + " files identical"};
}

Outcome ClipCoverage() {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> dur(0.01, 200.0);
  for (int i = 0; i < 1000; ++i) {
    const double d = dur(rng);
    const auto clips = SplitIntoClips(d);
    if (!oracle::CoversWithoutGaps(clips, d)) return {false, Fmt("gap at duration %.3f", d)};
    for (std::size_t k = 0; k < clips.size(); ++k) {
      if (clips[k].end - clips[k].start > 20.0 + 1e-9) return {false, "window over 20 s"};
      if (k > 0 && std::abs(clips[k].start - clips[k - 1].start - 10.0) > 1e-9)
        return {false, "stride is not 10 s"};
    }
  }
  return {true, "1000 durations"};
}

}  // namespace

int main() {
  Run("ctc-oracle-equivalence", kCtcSeconds, CtcOracle);
  Run("gradient-fidelity", kGradSeconds, GradientFidelity);
  Run("matching-optimality", kMatchSeconds, MatchingOptimality);
  Run("tolerance-monotonicity", kSweepSeconds, ToleranceMonotonicity);
  Run("edit-distance-oracle", kEditSeconds, EditOracle);
  Run("joint-training-direction", kJointSecondsPerSeed * kJointSeeds, JointDirection);
  Run("self-training-gain", kSelfTrainSeconds, SelfTrainGain);
  Run("determinism", 0, Determinism);
  Run("clip-coverage", 0, ClipCoverage);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
