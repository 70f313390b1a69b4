// prosody/run-config.h

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

// Run configuration: an INI file of [section] headers and key = value lines.
// Every key has a fixed type; unknown sections or keys are errors. See
// tests/fixtures/tiny.ini for a complete example.

#ifndef PROSODY_RUN_CONFIG_H_
#define PROSODY_RUN_CONFIG_H_

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "prosody/corpus.h"
#include "prosody/ctc.h"
#include "prosody/metrics.h"
#include "prosody/model.h"
#include "prosody/synth.h"
#include "prosody/train.h"

namespace prosody {

/// Name of the environment variable that overrides [paths] out.
constexpr const char *kOutDirEnv = "PROSODY_OUT_DIR";

struct RunConfig {
  // [run]
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // [paths]
  std::string corpus;  // empty: synthesize
  std::string rules;   // empty: built-in normalization rules
  std::string pool;    // unlabeled pool; synthesized when empty and corpus is empty
  std::string out = "out";

  // [corpus]
  double frame_period = kDefaultFramePeriod;
  double window = 20.0;
  double stride = 10.0;
  SplitRatios ratios;
  /// How overlapping clip predictions are combined; only "mean" exists.
  std::string merge = "mean";

  // [synth]
  SynthConfig synth;
  std::size_t n_unlabeled = 120;

  // [model]
  ModelDims dims;
  TrainConfig train;

  // [decode]
  std::string decode_split = "dev";
  BeamOptions beam;
  bool use_lm = true;
  std::size_t lm_order = 4;

  // [score]
  ScoringConfig scoring;
  std::string ref_events, hyp_events, ref_text, hyp_text;

  // [selftrain]
  double st_epsilon = 1e-4;
  std::size_t st_max_iters = 10;
  double st_label_noise = 0.3;
  std::size_t st_steps = 1000;

  /// Parses an INI stream. Throws ConfigError naming the offending key.
  static RunConfig Parse(std::istream &in);
  static RunConfig Load(const std::string &path);

  /// Range checks and input-path existence. Throws ConfigError.
  void Validate() const;

  /// Canonical `section.key=value` listing, one per line, sorted.
  std::string Canonical() const;
  /// FNV-1a 64 of Canonical() without paths.out and run.workers, which do
  /// not affect results; 16 hex digits.
  std::string Hash() const;

  /// Derived seed for one consumer of randomness.
  std::uint64_t SubSeed(std::uint64_t stream) const;
};

}  // namespace prosody

#endif  // PROSODY_RUN_CONFIG_H_
