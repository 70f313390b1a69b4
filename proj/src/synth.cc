// synth.cc

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

#include "prosody/synth.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

namespace prosody {

void SynthConfig::Validate() const {
  if (vocab.empty()) throw std::invalid_argument("synth: empty vocab");
  for (char c : vocab)
    if (c == ' ' || !std::isupper(static_cast<unsigned char>(c)))
      throw std::invalid_argument("synth: vocab must be uppercase letters");
  if (!(accent_rate >= 0.0 && accent_rate <= 1.0))
    throw std::invalid_argument("synth: accent_rate must be in [0,1]");
  if (noise_level < 0.0) throw std::invalid_argument("synth: negative noise");
  if (frames_per_token == 0 || pause_frames == 0)
    throw std::invalid_argument("synth: token durations must be positive");
  if (accent_dim >= feature_dim)
    throw std::invalid_argument("synth: accent_dim out of range");
  if (min_word_len == 0 || min_word_len > max_word_len || min_words == 0 ||
      min_words > max_words || lexicon_size == 0 || n_stories == 0)
    throw std::invalid_argument("synth: bad length ranges");
  if (!(frame_period > 0.0))
    throw std::invalid_argument("synth: frame_period must be positive");
}

std::map<char, std::vector<float>> PatternDictionary(const SynthConfig &cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.world_seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::string tokens = " " + cfg.vocab;
  std::map<char, std::vector<float>> patterns;
  for (char t : tokens) {
    std::vector<float> p(cfg.feature_dim);
    for (std::size_t d = 0; d < cfg.feature_dim; ++d)
      p[d] = d == cfg.accent_dim ? 0.0f : static_cast<float>(unif(rng));
    patterns[t] = std::move(p);
  }
  return patterns;
}

std::vector<std::string> Lexicon(const SynthConfig &cfg) {
  cfg.Validate();
  // Offset so the lexicon stream is independent of the pattern stream.
  std::mt19937_64 rng(cfg.world_seed ^ 0x9E3779B97F4A7C15ULL);
  std::uniform_int_distribution<std::size_t> len(cfg.min_word_len,
                                                 cfg.max_word_len);
  std::uniform_int_distribution<std::size_t> sym(0, cfg.vocab.size() - 1);
  std::set<std::string> seen;
  std::vector<std::string> lexicon;
  std::size_t attempts = 0;
  while (lexicon.size() < cfg.lexicon_size && attempts < 100000) {
    ++attempts;
    std::string w;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) w.push_back(cfg.vocab[sym(rng)]);
    if (seen.insert(w).second) lexicon.push_back(w);
  }
  return lexicon;
}

std::vector<Utterance> SynthCorpus(const SynthConfig &cfg) {
  const auto patterns = PatternDictionary(cfg);
  const auto lexicon = Lexicon(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> n_words(cfg.min_words,
                                                     cfg.max_words);
  std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
  std::bernoulli_distribution accented(cfg.accent_rate);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Utterance> corpus;
  corpus.reserve(cfg.n_utterances);
  for (std::size_t u = 0; u < cfg.n_utterances; ++u) {
    Utterance utt;
    char id[32];
    std::snprintf(id, sizeof(id), "%05zu", u);
    utt.id = cfg.id_prefix + id;
    std::snprintf(id, sizeof(id), "%03zu", u % cfg.n_stories);
    utt.story_id = cfg.id_prefix + "-story" + id;
    utt.frame_period = cfg.frame_period;
    utt.feature_dim = cfg.feature_dim;

    const std::size_t count = n_words(rng);
    std::vector<std::string> words;
    std::vector<bool> accent;
    for (std::size_t i = 0; i < count; ++i) {
      words.push_back(lexicon[pick(rng)]);
      accent.push_back(accented(rng));
    }

    std::size_t frame = 0;
    std::vector<AccentEvent> events;
    auto emit = [&](char token, std::size_t frames, bool boost) {
      const auto &p = patterns.at(token);
      for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t d = 0; d < cfg.feature_dim; ++d) {
          double v = p[d];
          if (boost && d == cfg.accent_dim) v += cfg.accent_boost;
          if (cfg.noise_level > 0.0) v += cfg.noise_level * noise(rng);
          utt.features.push_back(static_cast<float>(v));
        }
      }
      frame += frames;
    };
    std::string raw, norm;
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0) {
        emit(' ', cfg.pause_frames, false);
        raw += ' ';
        norm += ' ';
      }
      const double start = static_cast<double>(frame) * cfg.frame_period;
      for (char c : words[i]) emit(c, cfg.frames_per_token, accent[i]);
      const double end = static_cast<double>(frame) * cfg.frame_period;
      utt.words.push_back({words[i], start, end});
      if (accent[i]) events.push_back({start, end});
      for (char c : words[i])
        raw += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      norm += words[i];
    }
    raw += '.';
    utt.duration = static_cast<double>(frame) * cfg.frame_period;
    utt.transcript_raw = raw;
    utt.transcript_norm = norm;
    utt.accents = EventSet(std::move(events));
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace prosody
