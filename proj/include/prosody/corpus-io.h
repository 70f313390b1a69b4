// prosody/corpus-io.h

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

// File formats:
//
//  corpus (.jsonl)   one JSON object per utterance, keys id, story_id,
//                    duration, transcript, words ([[token, start, end], ...]),
//                    accents ([[start, end], ...]) and optionally
//                    features_path, n_frames, feature_dim, frame_period.
//                    features_path is resolved relative to the corpus file.
//  feature sidecar   raw little-endian float32, row-major n_frames x
//                    feature_dim.
//  events (.tsv)     utterance_id <TAB> start_s <TAB> end_s
//  texts (.tsv)      utterance_id <TAB> text
//  frame labels      utterance_id <TAB> frame_period <TAB> string of 0/1

#ifndef PROSODY_CORPUS_IO_H_
#define PROSODY_CORPUS_IO_H_

#include <map>
#include <string>
#include <vector>

#include "prosody/corpus.h"
#include "prosody/normalize.h"

namespace prosody {

/// Writes the corpus, putting each utterance's features in
/// `<features_dir>/<id>.f32` (relative to the corpus file's directory).
void WriteCorpus(const std::string &path, const std::vector<Utterance> &corpus,
                 const std::string &features_dir = "features");

/// Reads a corpus file, loading sidecars and normalizing transcripts.
/// Throws std::runtime_error naming the file and line on malformed input.
std::vector<Utterance> ReadCorpus(const std::string &path,
                                  const NormalizationRules &rules =
                                      NormalizationRules::Default());

std::vector<float> ReadFeatureSidecar(const std::string &path,
                                      std::size_t rows, std::size_t cols);
void WriteFeatureSidecar(const std::string &path,
                         const std::vector<float> &values);

using EventTable = std::map<std::string, EventSet>;
void WriteEventTsv(const std::string &path, const EventTable &events);
EventTable ReadEventTsv(const std::string &path);

using TextTable = std::map<std::string, std::string>;
void WriteTextTsv(const std::string &path, const TextTable &texts);
TextTable ReadTextTsv(const std::string &path);

using FrameLabelTable = std::map<std::string, FrameTrack>;
void WriteFrameLabelTsv(const std::string &path, const FrameLabelTable &labels);
FrameLabelTable ReadFrameLabelTsv(const std::string &path);

}  // namespace prosody

#endif  // PROSODY_CORPUS_IO_H_
