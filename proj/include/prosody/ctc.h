// prosody/ctc.h

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

// Connectionist temporal classification over a T x V grid of per-frame
// log-probabilities. Index 0 is the blank.

#ifndef PROSODY_CTC_H_
#define PROSODY_CTC_H_

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace prosody {

constexpr int kBlank = 0;
/// Stand-in for log(0) inside the DP tables.
constexpr double kLogZero = -1e30;

double LogAdd(double a, double b);

using LabelSeq = std::vector<int>;

class LogProbGrid {
 public:
  LogProbGrid() = default;
  LogProbGrid(std::size_t frames, std::size_t vocab, double fill = kLogZero)
      : frames_(frames), vocab_(vocab), values_(frames * vocab, fill) {}

  /// Row-wise log-softmax of a T x V logit matrix (row-major).
  static LogProbGrid FromLogits(std::size_t frames, std::size_t vocab,
                                std::span<const double> logits);

  std::size_t frames() const { return frames_; }
  std::size_t vocab() const { return vocab_; }
  double &operator()(std::size_t t, std::size_t v) { return values_[t * vocab_ + v]; }
  double operator()(std::size_t t, std::size_t v) const {
    return values_[t * vocab_ + v];
  }
  std::span<const double> Row(std::size_t t) const {
    return {values_.data() + t * vocab_, vocab_};
  }
  const std::vector<double> &values() const { return values_; }

  /// Largest |logsumexp(row)| over rows.
  double MaxRowNormError() const;

 private:
  std::size_t frames_ = 0;
  std::size_t vocab_ = 0;
  std::vector<double> values_;
};

/// Character inventory; index 0 is the blank, characters start at 1.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::string chars);

  std::size_t size() const { return chars_.size() + 1; }
  const std::string &chars() const { return chars_; }
  char Char(int index) const;
  /// Throws std::invalid_argument on characters outside the inventory.
  LabelSeq Encode(const std::string &text) const;
  std::string Decode(const LabelSeq &labels) const;
  bool Contains(char c) const { return chars_.find(c) != std::string::npos; }

 private:
  std::string chars_;
};

struct CtcLoss {
  /// -log P(target | grid); +infinity when no alignment exists.
  double nll = std::numeric_limits<double>::infinity();
  bool feasible() const { return std::isfinite(nll); }
};

/// Minimum frames needed to emit `target` (repeats need a blank between).
std::size_t MinCtcFrames(const LabelSeq &target);

/// Exact log-space forward pass. Throws std::invalid_argument on token
/// indices outside [1, V-1].
CtcLoss CtcForward(const LogProbGrid &grid, const LabelSeq &target);

struct CtcGradient {
  CtcLoss loss;
  /// T x V, d nll / d logits where grid = log_softmax(logits).
  std::vector<double> grad;
};

/// Forward-backward gradient. Throws std::invalid_argument when the target
/// is infeasible.
CtcGradient CtcGrad(const LogProbGrid &grid, const LabelSeq &target);

/// Best path: per-frame argmax (lowest index on ties), collapse, drop blanks.
LabelSeq GreedyDecode(const LogProbGrid &grid);

/// Token-level language model used for shallow fusion.
class TokenLm {
 public:
  virtual ~TokenLm() = default;
  virtual double LogProb(std::span<const int> history, int token) const = 0;
  /// Log-probability of ending the sentence after `history`.
  virtual double LogProbEnd(std::span<const int> history) const = 0;
};

struct BeamOptions {
  std::size_t width = 16;
  double lm_weight = 0.5;
  /// Per-token insertion bonus.
  double bonus = 0.5;
};

/// Prefix beam search with blank / non-blank merging. Prefixes are ranked by
/// log P_ctc + lm_weight * log P_lm + bonus * length; ties go to the
/// lexicographically smaller prefix. With `lm` null the LM term is zero.
LabelSeq BeamDecode(const LogProbGrid &grid, const BeamOptions &opts,
                    const TokenLm *lm = nullptr);

}  // namespace prosody

#endif  // PROSODY_CTC_H_
