// prosody/corpus.h

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

#ifndef PROSODY_CORPUS_H_
#define PROSODY_CORPUS_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prosody {

/// Raised when a configuration cannot be satisfied (as opposed to a malformed
/// argument, which raises std::invalid_argument).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kDefaultFramePeriod = 0.020;

/// Number of frames covering `duration` seconds. Ratios within 1e-9 of an
/// integer are snapped so that e.g. 0.30 / 0.02 gives 15, not 16.
std::size_t NumFrames(double duration, double frame_period);

struct AccentEvent {
  double start = 0.0;
  double end = 0.0;
  double Center() const { return 0.5 * (start + end); }
};

/// Pitch-accent events kept sorted by center, with no duplicate spans.
class EventSet {
 public:
  EventSet() = default;
  /// Sorts and de-duplicates. Throws std::invalid_argument if any event has
  /// start > end.
  explicit EventSet(std::vector<AccentEvent> events);

  /// Point annotation: a zero-length event widened to one frame.
  static AccentEvent FromPoint(double time, double frame_period);

  const std::vector<AccentEvent> &events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const AccentEvent &operator[](std::size_t i) const { return events_[i]; }

 private:
  std::vector<AccentEvent> events_;
};

/// Per-frame scores or binary labels on a fixed frame grid.
struct FrameTrack {
  double frame_period = kDefaultFramePeriod;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool IsBinary() const;
  /// Throws std::invalid_argument unless every value lies in [0, 1].
  void Validate() const;
};

struct WordTiming {
  std::string token;
  double start = 0.0;
  double end = 0.0;
};

struct Utterance {
  std::string id;
  std::string story_id;
  double duration = 0.0;
  double frame_period = kDefaultFramePeriod;
  std::size_t feature_dim = 0;
  /// Row-major, NumFrames(duration, frame_period) x feature_dim.
  std::vector<float> features;
  std::string transcript_raw;
  std::string transcript_norm;
  std::vector<WordTiming> words;
  EventSet accents;

  std::size_t num_frames() const {
    return feature_dim == 0 ? 0 : features.size() / feature_dim;
  }
  /// Checks the documented invariants; throws std::invalid_argument.
  void Validate() const;
};

struct ClipWindow {
  std::string utterance_id;
  double start = 0.0;
  double end = 0.0;
};

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

/// Overlapping windows starting at 0, stride, 2*stride, ...; a window whose
/// end does not move past the previous window's end is dropped.
std::vector<ClipWindow> SplitIntoClips(double duration, double window = 20.0,
                                       double stride = 10.0,
                                       const std::string &utterance_id = "");

/// Frame i is positive iff (i + 0.5) * frame_period lies in some [start, end).
FrameTrack EventsToFrames(const EventSet &events, double duration,
                          double frame_period = kDefaultFramePeriod);

/// Each maximal run of frames scoring >= threshold becomes one event.
EventSet FramesToEvents(const FrameTrack &scores, double threshold = 0.5);

/// Averages the clip-level tracks of one utterance back onto the utterance
/// frame grid. Every utterance frame must be covered by at least one clip.
FrameTrack MergeClipScores(
    const std::vector<std::pair<ClipWindow, FrameTrack>> &clips);

struct SplitRatios {
  double train = 0.75;
  double dev = 0.15;
  double test = 0.10;
};

/// Story-level split: no story appears in both train and test. Sizes are
/// measured in utterances. Deterministic given `seed`.
CorpusSplit MakeSplits(const std::vector<Utterance> &corpus,
                       const SplitRatios &ratios, std::uint64_t seed);

}  // namespace prosody

#endif  // PROSODY_CORPUS_H_
