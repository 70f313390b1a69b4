// prosody/train.h

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

#ifndef PROSODY_TRAIN_H_
#define PROSODY_TRAIN_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "prosody/corpus.h"
#include "prosody/model.h"

namespace prosody {

/// Thrown when a loss or parameter becomes non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t steps = 2000;
  /// The encoder is held fixed for the first floor(freeze_fraction * steps)
  /// steps; the input projection is never updated.
  double freeze_fraction = 0.5;
  /// Peak step size, cosine-decayed to zero over `steps`.
  double learning_rate = 0.5;
  std::size_t batch_size = 8;
  double lambda = 1.0;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 5.0;
  ProsodyLossKind prosody_loss = ProsodyLossKind::kMse;
  std::uint64_t seed = 0;

  void Validate() const;
  std::size_t FreezeSteps() const;
};

struct StepLoss {
  std::size_t step = 0;
  double l_asr = 0.0;
  double l_pad = 0.0;
  double l_j = 0.0;
};

struct TrainResult {
  JointModel model;
  std::vector<StepLoss> history;
};

double LearningRate(const TrainConfig &cfg, std::size_t step);

/// Mean joint loss over a set of examples with their gradients summed in the
/// given order; the value does not depend on the order.
LossGradient BatchLossGradient(const JointModel &model,
                               const std::vector<const TrainExample *> &batch,
                               double lambda, ProsodyLossKind kind);

/// Mini-batch gradient descent. Batches are drawn from a per-epoch shuffle
/// seeded by cfg.seed. Throws std::invalid_argument on an empty training
/// set and DivergenceError when a loss goes non-finite.
TrainResult Train(const JointModel &init, const std::vector<TrainExample> &data,
                  const TrainConfig &cfg);

/// Builds a training example from an utterance: CTC target from the
/// normalized transcript, frame labels from `labels` or, when null, from the
/// utterance's accent events. Throws std::invalid_argument when the target
/// cannot be aligned to the frames.
TrainExample MakeExample(const Utterance &utt, const Vocabulary &vocab,
                         const FrameTrack *labels = nullptr);

void WriteTrainLog(const std::string &path, const std::vector<StepLoss> &history);

}  // namespace prosody

#endif  // PROSODY_TRAIN_H_
