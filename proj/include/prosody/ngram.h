// prosody/ngram.h

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

#ifndef PROSODY_NGRAM_H_
#define PROSODY_NGRAM_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prosody/ctc.h"

namespace prosody {

/// Character n-gram model with add-one smoothing.
///
/// Each sentence is padded on the left with n-1 boundary symbols. For n >= 2
/// the end of sentence is predicted as the boundary symbol, so conditional
/// distributions range over the alphabet plus the boundary. A unigram model
/// has no context to pad and does not model the sentence end; its
/// distribution ranges over the alphabet only.
class NGramLm {
 public:
  NGramLm() = default;

  std::size_t order() const { return order_; }
  const std::string &alphabet() const { return alphabet_; }
  /// Size of every conditional distribution.
  std::size_t NumOutcomes() const {
    return alphabet_.size() + (order_ >= 2 ? 1 : 0);
  }

  /// log P(c | history); `history` is the sentence so far, unpadded.
  double LogProb(std::string_view history, char c) const;
  /// log P(end of sentence | history). Zero for unigram models.
  double LogProbEnd(std::string_view history) const;
  /// The full conditional distribution after `history`; the last entry is
  /// the boundary when order >= 2.
  std::vector<double> Distribution(std::string_view history) const;

  void Save(const std::string &path) const;
  static NGramLm Load(const std::string &path);
  std::string ToJson() const;
  static NGramLm FromJson(const std::string &text);

  friend NGramLm TrainNGram(const std::vector<std::string> &texts,
                            std::size_t order, const std::string &alphabet);

 private:
  using Context = std::vector<int>;
  int Symbol(char c) const;
  Context ContextFor(std::string_view history) const;
  double LogProbSymbol(const Context &ctx, int symbol) const;

  std::size_t order_ = 0;
  std::string alphabet_;
  std::map<Context, std::vector<std::uint64_t>> counts_;
};

/// Trains an order-`order` model. When `alphabet` is empty it is the sorted
/// set of characters in `texts`; otherwise every text character must be in
/// it. Throws std::invalid_argument for order < 1 or an empty text list.
NGramLm TrainNGram(const std::vector<std::string> &texts, std::size_t order,
                   const std::string &alphabet = "");

/// Shallow-fusion adapter mapping CTC token indices to LM characters.
class CharLmScorer : public TokenLm {
 public:
  /// Throws std::invalid_argument if a vocabulary character is missing from
  /// the LM alphabet.
  CharLmScorer(const NGramLm &lm, const Vocabulary &vocab);

  double LogProb(std::span<const int> history, int token) const override;
  double LogProbEnd(std::span<const int> history) const override;

 private:
  std::string ToText(std::span<const int> history) const;
  const NGramLm &lm_;
  const Vocabulary &vocab_;
};

}  // namespace prosody

#endif  // PROSODY_NGRAM_H_
