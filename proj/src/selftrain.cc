// selftrain.cc

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

#include "prosody/selftrain.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "prosody/corpus-io.h"

namespace prosody {

std::vector<std::size_t> FoldAssignment::Sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : fold) ++sizes[f];
  return sizes;
}

namespace {

bool Balanced(const std::vector<std::size_t> &sizes) {
  auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  return *hi - *lo <= 1;
}

}  // namespace

FoldAssignment PartitionFolds(const std::vector<std::string> &ids,
                              std::uint64_t seed, std::size_t k,
                              const std::vector<std::string> &story_ids) {
  if (k == 0) throw std::invalid_argument("folds: k must be positive");
  if (ids.size() < k)
    throw ConfigError("folds: " + std::to_string(ids.size()) +
                      " utterances cannot fill " + std::to_string(k) + " folds");
  if (!story_ids.empty() && story_ids.size() != ids.size())
    throw std::invalid_argument("folds: story ids not parallel to ids");

  FoldAssignment out;
  out.k = k;
  out.ids = ids;
  out.fold.assign(ids.size(), 0);
  std::mt19937_64 rng(seed);

  if (!story_ids.empty()) {
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < ids.size(); ++i) members[story_ids[i]].push_back(i);
    std::vector<std::string> stories;
    for (const auto &[s, _] : members) stories.push_back(s);
    std::shuffle(stories.begin(), stories.end(), rng);
    std::vector<std::size_t> sizes(k, 0);
    for (const auto &s : stories) {
      const std::size_t f = static_cast<std::size_t>(
          std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
      for (auto i : members[s]) out.fold[i] = f;
      sizes[f] += members[s].size();
    }
    if (Balanced(sizes)) return out;
    out.story_disjoint = false;
  }

  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t pos = 0; pos < order.size(); ++pos) out.fold[order[pos]] = pos % k;
  return out;
}

FrameTrack Binarize(const FrameTrack &scores, double threshold) {
  FrameTrack out = scores;
  for (auto &v : out.values) v = v >= threshold ? 1.0 : 0.0;
  return out;
}

FrameTrack Vote(const FrameTrack &a, const FrameTrack &b, const FrameTrack &c) {
  if (a.size() != b.size() || a.size() != c.size())
    throw std::invalid_argument("vote: tracks differ in length");
  if (a.frame_period != b.frame_period || a.frame_period != c.frame_period)
    throw std::invalid_argument("vote: tracks differ in frame period");
  if (!a.IsBinary() || !b.IsBinary() || !c.IsBinary())
    throw std::invalid_argument("vote: tracks must be binary");
  FrameTrack out;
  out.frame_period = a.frame_period;
  out.values.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values[i] = (a.values[i] + b.values[i] + c.values[i]) >= 2.0 ? 1.0 : 0.0;
  return out;
}

namespace {

void CheckDisjoint(const std::vector<LabeledUtterance> &labeled,
                   const std::vector<const Utterance *> &unlabeled) {
  std::set<std::string> gold;
  for (const auto &l : labeled) gold.insert(l.utterance->id);
  for (const auto *u : unlabeled)
    if (gold.count(u->id))
      throw std::invalid_argument("self-training: utterance " + u->id +
                                  " is both labeled and unlabeled");
}

std::vector<LabeledUtterance> WithPseudo(
    std::vector<LabeledUtterance> data,
    const std::vector<const Utterance *> &unlabeled,
    const std::map<std::string, FrameTrack> &pseudo) {
  for (const auto *u : unlabeled) {
    auto it = pseudo.find(u->id);
    if (it != pseudo.end()) data.push_back({u, it->second});
  }
  return data;
}

std::uint64_t RoundSeed(std::uint64_t base, std::size_t iteration,
                        std::size_t slot) {
  return base * 1000003ULL + iteration * 16ULL + slot;
}

}  // namespace

SelfTrainState InitSelfTrain(
    const std::vector<LabeledUtterance> &labeled,
    const std::vector<const Utterance *> &unlabeled,
    const std::map<std::string, FrameTrack> &initial_pseudo_labels,
    const Trainer &trainer, const DevScorer &scorer,
    const SelfTrainOptions &opts) {
  CheckDisjoint(labeled, unlabeled);
  SelfTrainState state;
  state.options = opts;
  std::vector<std::string> ids, stories;
  for (const auto &l : labeled) {
    ids.push_back(l.utterance->id);
    stories.push_back(l.utterance->story_id);
  }
  state.folds = PartitionFolds(ids, opts.seed, 3, stories);
  state.pseudo_labels = initial_pseudo_labels;

  FramePredictor model = trainer(
      WithPseudo(labeled, unlabeled, state.pseudo_labels),
      RoundSeed(opts.seed, 0, 3));
  state.best_dev_f1 = scorer(model);
  IterationRecord rec;
  rec.iteration = 0;
  rec.dev_f1 = state.best_dev_f1;
  rec.accepted = true;
  rec.pseudo_labels = state.pseudo_labels;
  state.history.push_back(std::move(rec));
  if (opts.max_iters == 0) state.halted = true;
  return state;
}

SelfTrainState SelfTrainIterate(SelfTrainState state,
                                const std::vector<LabeledUtterance> &labeled,
                                const std::vector<const Utterance *> &unlabeled,
                                const Trainer &trainer,
                                const DevScorer &scorer) {
  if (state.halted)
    throw std::logic_error("self-training: state is halted");
  if (state.folds.ids.size() != labeled.size())
    throw std::invalid_argument("self-training: labeled set changed size");
  CheckDisjoint(labeled, unlabeled);
  const SelfTrainOptions &opts = state.options;
  const std::size_t iter = state.iteration + 1;

  IterationRecord rec;
  rec.iteration = iter;
  try {
    // (1) one model per hold-out fold.
    std::vector<std::vector<LabeledUtterance>> fold_data(3);
    for (std::size_t h = 0; h < 3; ++h) {
      std::vector<LabeledUtterance> data;
      for (std::size_t i = 0; i < labeled.size(); ++i)
        if (state.folds.fold[i] != h) data.push_back(labeled[i]);
      fold_data[h] = WithPseudo(std::move(data), unlabeled, state.pseudo_labels);
    }
    std::vector<FramePredictor> fold_models(3);
    if (opts.parallel_folds) {
      std::vector<std::future<FramePredictor>> jobs;
      for (std::size_t h = 0; h < 3; ++h)
        jobs.push_back(std::async(std::launch::async, trainer,
                                  std::cref(fold_data[h]),
                                  RoundSeed(opts.seed, iter, h)));
      for (std::size_t h = 0; h < 3; ++h) fold_models[h] = jobs[h].get();
    } else {
      for (std::size_t h = 0; h < 3; ++h)
        fold_models[h] = trainer(fold_data[h], RoundSeed(opts.seed, iter, h));
    }

    // (2)-(3) vote on the pool; the new labels replace the old ones outright.
    for (const auto *u : unlabeled) {
      FrameTrack v[3];
      for (std::size_t h = 0; h < 3; ++h)
        v[h] = Binarize(fold_models[h](*u), opts.threshold);
      rec.pseudo_labels[u->id] = Vote(v[0], v[1], v[2]);
    }

    // (4)-(5) retrain on everything and score on dev.
    FramePredictor full = trainer(WithPseudo(labeled, unlabeled, rec.pseudo_labels),
                                  RoundSeed(opts.seed, iter, 3));
    rec.dev_f1 = scorer(full);
  } catch (const std::exception &e) {
    state.iteration = iter;
    state.halted = true;
    state.diagnostic = "iteration " + std::to_string(iter) + ": " + e.what();
    rec.accepted = false;
    rec.dev_f1 = state.best_dev_f1;
    state.history.push_back(std::move(rec));
    return state;
  }

  // (6) halting rule.
  rec.gain = rec.dev_f1 - state.best_dev_f1;
  state.iteration = iter;
  if (rec.gain >= opts.epsilon) {
    rec.accepted = true;
    state.best_dev_f1 = rec.dev_f1;
    state.pseudo_labels = rec.pseudo_labels;
  } else {
    state.halted = true;
    state.diagnostic = "dev F1 gain below epsilon";
  }
  if (iter >= opts.max_iters && !state.halted) {
    state.halted = true;
    state.diagnostic = "reached max_iters";
  }
  state.history.push_back(std::move(rec));
  return state;
}

SelfTrainState RunSelfTrain(SelfTrainState state,
                            const std::vector<LabeledUtterance> &labeled,
                            const std::vector<const Utterance *> &unlabeled,
                            const Trainer &trainer, const DevScorer &scorer) {
  while (!state.halted)
    state = SelfTrainIterate(std::move(state), labeled, unlabeled, trainer, scorer);
  return state;
}

Trainer MakeJointTrainer(const Vocabulary &vocab, const ModelDims &dims,
                         const TrainConfig &cfg) {
  return [vocab, dims, cfg](const std::vector<LabeledUtterance> &data,
                            std::uint64_t seed) -> FramePredictor {
    std::vector<TrainExample> examples;
    examples.reserve(data.size());
    for (const auto &d : data)
      examples.push_back(MakeExample(*d.utterance, vocab, &d.labels));
    TrainConfig c = cfg;
    c.seed = seed;
    auto model = std::make_shared<JointModel>(
        Train(JointModel::Random(dims, seed), examples, c).model);
    return [model](const Utterance &u) {
      return model->Forward(u.features, u.num_frames(), u.frame_period).prosody;
    };
  };
}

DevScorer MakeDevScorer(const std::vector<const Utterance *> &dev,
                        double tol_ms, double threshold) {
  return [dev, tol_ms, threshold](const FramePredictor &predict) {
    std::vector<std::pair<EventSet, EventSet>> pairs;
    pairs.reserve(dev.size());
    for (const auto *u : dev)
      pairs.emplace_back(u->accents, FramesToEvents(predict(*u), threshold));
    ScoringConfig cfg;
    cfg.tolerances_ms = {tol_ms};
    return ToleranceSweep(pairs, cfg).front().f1;
  };
}

void WriteSelfTrainCheckpoint(const std::string &dir,
                              const SelfTrainState &state) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["iteration"] = state.iteration;
  j["best_dev_f1"] = state.best_dev_f1;
  j["halted"] = state.halted;
  j["diagnostic"] = state.diagnostic;
  j["max_iters"] = state.options.max_iters;
  j["epsilon"] = state.options.epsilon;
  j["fold_sizes"] = state.folds.Sizes();
  j["folds_story_disjoint"] = state.folds.story_disjoint;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto &r : state.history) {
    const std::string file = "pseudo_labels_iter" + std::to_string(r.iteration) + ".tsv";
    hist.push_back({{"iteration", r.iteration},
                    {"dev_f1", r.dev_f1},
                    {"gain", r.gain},
                    {"accepted", r.accepted},
                    {"pseudo_labels", file}});
    WriteFrameLabelTsv((fs::path(dir) / file).string(),
                       FrameLabelTable(r.pseudo_labels.begin(), r.pseudo_labels.end()));
  }
  j["history"] = hist;
  std::ofstream out(fs::path(dir) / "state.json");
  if (!out) throw std::runtime_error("cannot write " + dir + "/state.json");
  out << j.dump(2) << '\n';
}

}  // namespace prosody
