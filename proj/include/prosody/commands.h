// prosody/commands.h

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

// Pipeline commands. Every command reads and writes inside RunConfig::out:
//
//   prepare    corpus.jsonl (+ features/), pool.jsonl, splits.json,
//              clips.tsv, labels.tsv, ref_events.tsv, ref_text.tsv,
//              prepare.json
//   train      model.ckpt, train_log.csv, train.json
//   decode     lm.json, hyp_text.tsv, hyp_events.tsv, decode.json
//   score      score.json, score.tsv
//   selftrain  selftrain/ (state and pseudo-labels), selftrain.json
//   report     report.json, report.tsv
//
// Reports carry no timestamps, so identical inputs give identical bytes.

#ifndef PROSODY_COMMANDS_H_
#define PROSODY_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

#include "prosody/corpus.h"
#include "prosody/normalize.h"
#include "prosody/run-config.h"

namespace prosody {

enum ExitStatus { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

const std::vector<std::string> &CommandNames();
bool IsCommand(const std::string &name);

/// Runs one command. Throws ConfigError for configuration problems and
/// std::runtime_error (or another std::exception) for runtime failures.
/// Progress lines go to `log`.
void RunCommand(const std::string &name, const RunConfig &cfg, std::ostream &log);

/// The part of `utt` inside `clip`: frames [round(start/p), round(end/p)),
/// the words lying wholly inside, accents cut to the window. Times are
/// relative to the clip start. A clip covering the whole utterance returns
/// it unchanged.
Utterance CutClip(const Utterance &utt, const ClipWindow &clip,
                  const NormalizationRules &rules = NormalizationRules::Default());

}  // namespace prosody

#endif  // PROSODY_COMMANDS_H_
