// prosody/synth.h

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

// Synthetic speech-like corpus. Every character token emits a fixed number of
// frames of a token-specific feature pattern plus Gaussian noise, and the
// word separator emits pause frames. Accented words get a constant boost in
// one feature dimension over their frames. Transcripts, word timings and
// accent events are exact by construction.

#ifndef PROSODY_SYNTH_H_
#define PROSODY_SYNTH_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prosody/corpus.h"

namespace prosody {

struct SynthConfig {
  std::size_t n_utterances = 240;
  /// Uppercase letters words are built from; ' ' is the word separator.
  std::string vocab = "ABCDEFGH";
  std::size_t lexicon_size = 24;
  std::size_t min_word_len = 2;
  std::size_t max_word_len = 4;
  std::size_t min_words = 3;
  std::size_t max_words = 6;
  double accent_rate = 0.3;
  double noise_level = 0.8;
  std::size_t frames_per_token = 3;
  std::size_t pause_frames = 2;
  std::size_t feature_dim = 13;
  std::size_t accent_dim = 12;
  double accent_boost = 1.5;
  std::size_t n_stories = 60;
  double frame_period = kDefaultFramePeriod;
  std::string id_prefix = "utt";
  /// Seeds the pattern dictionary and the lexicon. Corpora that should be
  /// drawn from the same "language" must share it.
  std::uint64_t world_seed = 1;
  /// Seeds utterance sampling and noise.
  std::uint64_t seed = 1;

  void Validate() const;
};

/// Token -> feature pattern (length feature_dim). Keys are the vocab
/// characters plus ' '. The accent dimension is zero in every pattern.
std::map<char, std::vector<float>> PatternDictionary(const SynthConfig &cfg);

std::vector<std::string> Lexicon(const SynthConfig &cfg);

std::vector<Utterance> SynthCorpus(const SynthConfig &cfg);

}  // namespace prosody

#endif  // PROSODY_SYNTH_H_
