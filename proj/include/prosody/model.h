// prosody/model.h

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

// Joint acoustic model: a frozen input projection feeds a bidirectional tanh
// recurrent encoder whose per-frame state is shared by
//
//   ASR head      linear H -> V, log-softmax (CTC, blank = 0)
//   prosody head  linear H -> H, layer norm (gain, bias), linear H -> 1,
//                 logistic
//
// Parameters live in one flat vector; ParamLayout names the blocks. All
// gradients are derived by hand and checked against finite differences.

#ifndef PROSODY_MODEL_H_
#define PROSODY_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prosody/corpus.h"
#include "prosody/ctc.h"

namespace prosody {

struct ModelDims {
  std::size_t input_dim = 13;   // F
  std::size_t hidden_dim = 32;  // H, split evenly between the directions
  std::size_t vocab_size = 10;  // V, blank included

  void Validate() const;
};

enum class ParamGroup { kInput, kEncoder, kAsrHead, kProsodyHead };

struct ParamBlock {
  std::string name;
  ParamGroup group;
  std::size_t offset;
  std::size_t rows;
  std::size_t cols;
  std::size_t size() const { return rows * cols; }
};

class ParamLayout {
 public:
  explicit ParamLayout(const ModelDims &dims);
  const std::vector<ParamBlock> &blocks() const { return blocks_; }
  const ParamBlock &Get(const std::string &name) const;
  std::size_t total() const { return total_; }

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t total_ = 0;
};

enum class ProsodyLossKind { kMse, kBce };

struct JointLossBreakdown {
  double l_asr = 0.0;
  double l_pad = 0.0;
  double lambda = 1.0;
  double l_j = 0.0;
};

struct ModelOutput {
  LogProbGrid asr;
  FrameTrack prosody;
};

/// One supervised utterance: features (row-major T x F), CTC target and
/// binary frame labels.
struct TrainExample {
  std::string id;
  std::vector<float> features;
  std::size_t frames = 0;
  LabelSeq target;
  FrameTrack labels;
};

class JointModel {
 public:
  JointModel() : JointModel(ModelDims{}) {}
  /// All parameters zero.
  explicit JointModel(const ModelDims &dims);
  /// Scaled-uniform weights, unit layer-norm gain, zero biases.
  static JointModel Random(const ModelDims &dims, std::uint64_t seed);

  const ModelDims &dims() const { return dims_; }
  const ParamLayout &layout() const { return layout_; }
  std::vector<double> &params() { return params_; }
  const std::vector<double> &params() const { return params_; }
  std::span<double> Block(const std::string &name);
  std::span<const double> Block(const std::string &name) const;

  /// Throws std::invalid_argument when features.size() != frames * F.
  ModelOutput Forward(std::span<const float> features, std::size_t frames,
                      double frame_period = kDefaultFramePeriod) const;

  bool AllFinite() const;

 private:
  ModelDims dims_;
  ParamLayout layout_;
  std::vector<double> params_;
};

/// Throws std::invalid_argument on prosody length mismatch.
JointLossBreakdown JointLoss(const LogProbGrid &asr_out,
                             const FrameTrack &prosody_out,
                             const LabelSeq &target,
                             const FrameTrack &target_frames, double lambda,
                             ProsodyLossKind kind = ProsodyLossKind::kMse);

struct LossGradient {
  JointLossBreakdown loss;
  std::vector<double> grad;  // same layout as JointModel::params()
};

/// Analytic d l_j / d params for one example.
LossGradient ComputeLossGradient(const JointModel &model,
                                 const TrainExample &example, double lambda,
                                 ProsodyLossKind kind = ProsodyLossKind::kMse);

struct GradCheckOptions {
  double eps = 1e-5;
  double fraction = 0.01;
  /// At least this many coordinates are checked, whatever the fraction.
  std::size_t min_coords = 32;
  double lambda = 1.0;
  ProsodyLossKind kind = ProsodyLossKind::kMse;
  std::uint64_t seed = 0;
  /// Denominator floor for the relative error.
  double floor = 1e-8;
};

/// Max relative error |a - n| / max(|a|, |n|, floor) between analytic and
/// central-difference gradients over a random parameter subsample.
double GradCheck(const JointModel &model, const TrainExample &example,
                 const GradCheckOptions &opts = {});

/// Checkpoint: one JSON header line, then the parameters as little-endian
/// float32.
void SaveCheckpoint(const std::string &path, const JointModel &model,
                    const std::string &config_hash);
JointModel LoadCheckpoint(const std::string &path,
                          std::string *config_hash = nullptr);

}  // namespace prosody

#endif  // PROSODY_MODEL_H_
