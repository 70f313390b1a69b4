// train.cc

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

#include "prosody/train.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

namespace prosody {

void TrainConfig::Validate() const {
  if (!(freeze_fraction >= 0.0 && freeze_fraction <= 1.0))
    throw std::invalid_argument("train: freeze_fraction must be in [0,1]");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("train: learning_rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("train: batch_size is 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("train: negative lambda");
  if (clip_norm < 0.0) throw std::invalid_argument("train: negative clip_norm");
}

std::size_t TrainConfig::FreezeSteps() const {
  return static_cast<std::size_t>(
      std::floor(freeze_fraction * static_cast<double>(steps)));
}

double LearningRate(const TrainConfig &cfg, std::size_t step) {
  if (cfg.steps == 0) return cfg.learning_rate;
  const double progress = static_cast<double>(step) / static_cast<double>(cfg.steps);
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

LossGradient BatchLossGradient(const JointModel &model,
                               const std::vector<const TrainExample *> &batch,
                               double lambda, ProsodyLossKind kind) {
  LossGradient total;
  total.loss.lambda = lambda;
  total.grad.assign(model.layout().total(), 0.0);
  if (batch.empty()) return total;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const TrainExample *ex : batch) {
    LossGradient g = ComputeLossGradient(model, *ex, lambda, kind);
    total.loss.l_asr += g.loss.l_asr * scale;
    total.loss.l_pad += g.loss.l_pad * scale;
    for (std::size_t i = 0; i < g.grad.size(); ++i)
      total.grad[i] += g.grad[i] * scale;
  }
  total.loss.l_j = total.loss.l_asr + lambda * total.loss.l_pad;
  return total;
}

TrainResult Train(const JointModel &init, const std::vector<TrainExample> &data,
                  const TrainConfig &cfg) {
  cfg.Validate();
  if (data.empty()) throw std::invalid_argument("train: empty training set");
  TrainResult result{init, {}};
  JointModel &model = result.model;
  result.history.reserve(cfg.steps);

  // Parameters that a step may change: never the input projection, and not
  // the encoder during the freeze phase.
  std::vector<char> encoder_mask(model.layout().total(), 0);
  std::vector<char> trainable(model.layout().total(), 1);
  for (const auto &b : model.layout().blocks()) {
    for (std::size_t i = b.offset; i < b.offset + b.size(); ++i) {
      if (b.group == ParamGroup::kInput) trainable[i] = 0;
      if (b.group == ParamGroup::kEncoder) encoder_mask[i] = 1;
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const std::size_t freeze_steps = cfg.FreezeSteps();
  const std::size_t batch_size = std::min(cfg.batch_size, data.size());

  std::vector<const TrainExample *> batch;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    batch.clear();
    while (batch.size() < batch_size) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&data[order[cursor++]]);
    }
    LossGradient lg = BatchLossGradient(model, batch, cfg.lambda, cfg.prosody_loss);
    if (!std::isfinite(lg.loss.l_j))
      throw DivergenceError("train: non-finite loss at step " +
                            std::to_string(step) + " (l_asr=" +
                            std::to_string(lg.loss.l_asr) + ", l_pad=" +
                            std::to_string(lg.loss.l_pad) + ")");
    result.history.push_back({step, lg.loss.l_asr, lg.loss.l_pad, lg.loss.l_j});

    const bool frozen = step < freeze_steps;
    double sq = 0.0;
    for (std::size_t i = 0; i < lg.grad.size(); ++i) {
      if (!trainable[i] || (frozen && encoder_mask[i])) lg.grad[i] = 0.0;
      sq += lg.grad[i] * lg.grad[i];
    }
    double scale = LearningRate(cfg, step);
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm))
      throw DivergenceError("train: non-finite gradient at step " +
                            std::to_string(step));
    if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) scale *= cfg.clip_norm / norm;
    for (std::size_t i = 0; i < lg.grad.size(); ++i)
      model.params()[i] -= scale * lg.grad[i];
  }
  if (!model.AllFinite())
    throw DivergenceError("train: parameters became non-finite");
  return result;
}

TrainExample MakeExample(const Utterance &utt, const Vocabulary &vocab,
                         const FrameTrack *labels) {
  TrainExample ex;
  ex.id = utt.id;
  ex.features = utt.features;
  ex.frames = utt.num_frames();
  ex.target = vocab.Encode(utt.transcript_norm);
  ex.labels = labels ? *labels
                     : EventsToFrames(utt.accents, utt.duration, utt.frame_period);
  if (ex.labels.size() != ex.frames)
    throw std::invalid_argument("utterance " + utt.id +
                                ": label track does not match feature frames");
  if (MinCtcFrames(ex.target) > ex.frames)
    throw std::invalid_argument("utterance " + utt.id +
                                ": transcript too long for its frames");
  return ex;
}

void WriteTrainLog(const std::string &path, const std::vector<StepLoss> &history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(10);
  out << "step,l_asr,l_pad,l_j\n";
  for (const auto &h : history)
    out << h.step << ',' << h.l_asr << ',' << h.l_pad << ',' << h.l_j << '\n';
}

}  // namespace prosody
