// prosody/selftrain.h

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

// Self-training with model voting. The labeled set is split into three
// folds; each iteration trains one model per hold-out fold on the other two
// folds plus the current pseudo-labeled pool, relabels the pool by per-frame
// majority vote of the three models, retrains on everything and keeps going
// while dev F1 (100 ms tolerance) improves.

#ifndef PROSODY_SELFTRAIN_H_
#define PROSODY_SELFTRAIN_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "prosody/corpus.h"
#include "prosody/ctc.h"
#include "prosody/metrics.h"
#include "prosody/model.h"
#include "prosody/train.h"

namespace prosody {

struct FoldAssignment {
  std::size_t k = 3;
  std::vector<std::string> ids;
  std::vector<std::size_t> fold;  // fold[i] is the fold of ids[i]
  /// False when story grouping could not keep sizes within one of each other
  /// and the assignment fell back to utterance level.
  bool story_disjoint = true;

  std::vector<std::size_t> Sizes() const;
};

/// Deterministic k-way split with fold sizes differing by at most one. When
/// `story_ids` is non-empty (parallel to `ids`) whole stories go to one fold
/// if that still satisfies the size rule. Throws ConfigError when there are
/// fewer ids than folds.
FoldAssignment PartitionFolds(const std::vector<std::string> &ids,
                              std::uint64_t seed, std::size_t k = 3,
                              const std::vector<std::string> &story_ids = {});

/// Per-frame majority of three binary tracks.
FrameTrack Vote(const FrameTrack &a, const FrameTrack &b, const FrameTrack &c);

FrameTrack Binarize(const FrameTrack &scores, double threshold = 0.5);

struct LabeledUtterance {
  const Utterance *utterance = nullptr;
  FrameTrack labels;
};

using FramePredictor = std::function<FrameTrack(const Utterance &)>;
/// Trains a model on the given data and returns its frame scorer. Must be
/// safe to call concurrently.
using Trainer = std::function<FramePredictor(
    const std::vector<LabeledUtterance> &, std::uint64_t seed)>;
/// Dev-set F1 of a predictor.
using DevScorer = std::function<double(const FramePredictor &)>;

struct IterationRecord {
  std::size_t iteration = 0;
  double dev_f1 = 0.0;
  double gain = 0.0;
  bool accepted = false;
  /// Pseudo-labels produced this iteration (kept for audit even when the
  /// iteration is rejected).
  std::map<std::string, FrameTrack> pseudo_labels;
};

struct SelfTrainOptions {
  std::size_t max_iters = 10;
  double epsilon = 1e-4;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  /// Train the three hold-out models on separate threads.
  bool parallel_folds = true;
};

struct SelfTrainState {
  std::size_t iteration = 0;
  std::map<std::string, FrameTrack> pseudo_labels;
  FoldAssignment folds;
  double best_dev_f1 = 0.0;
  bool halted = false;
  std::string diagnostic;
  SelfTrainOptions options;
  std::vector<IterationRecord> history;
};

/// Iteration 0: assigns folds, trains on labeled data plus
/// `initial_pseudo_labels` (may be empty) and records the baseline dev F1.
/// Throws std::invalid_argument if labeled and unlabeled ids overlap.
SelfTrainState InitSelfTrain(
    const std::vector<LabeledUtterance> &labeled,
    const std::vector<const Utterance *> &unlabeled,
    const std::map<std::string, FrameTrack> &initial_pseudo_labels,
    const Trainer &trainer, const DevScorer &scorer,
    const SelfTrainOptions &opts = {});

/// One voting round. Throws std::logic_error when `state` is halted. A
/// round without at least `epsilon` dev F1 gain restores the previous
/// pseudo-labels and halts; so does reaching max_iters. A trainer failure
/// halts with the message in `diagnostic`.
SelfTrainState SelfTrainIterate(SelfTrainState state,
                                const std::vector<LabeledUtterance> &labeled,
                                const std::vector<const Utterance *> &unlabeled,
                                const Trainer &trainer, const DevScorer &scorer);

/// Iterates until halted.
SelfTrainState RunSelfTrain(SelfTrainState state,
                            const std::vector<LabeledUtterance> &labeled,
                            const std::vector<const Utterance *> &unlabeled,
                            const Trainer &trainer, const DevScorer &scorer);

/// Trainer backed by the joint model; each call starts from a fresh random
/// initialization seeded by the call's seed.
Trainer MakeJointTrainer(const Vocabulary &vocab, const ModelDims &dims,
                         const TrainConfig &cfg);

/// Micro-averaged F1 at `tol_ms` of predicted events against gold accents.
DevScorer MakeDevScorer(const std::vector<const Utterance *> &dev,
                        double tol_ms = 100.0, double threshold = 0.5);

/// Writes `<dir>/state.json` and `<dir>/pseudo_labels_iter<N>.tsv` for every
/// recorded iteration.
void WriteSelfTrainCheckpoint(const std::string &dir, const SelfTrainState &state);

}  // namespace prosody

#endif  // PROSODY_SELFTRAIN_H_
