// corpus.cc

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

#include "prosody/corpus.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace prosody {

namespace {
constexpr double kTimeEps = 1e-9;
}

std::size_t NumFrames(double duration, double frame_period) {
  if (!(frame_period > 0.0))
    throw std::invalid_argument("frame_period must be positive");
  if (duration <= 0.0) return 0;
  double ratio = duration / frame_period;
  double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) < 1e-9) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

EventSet::EventSet(std::vector<AccentEvent> events) : events_(std::move(events)) {
  for (const auto &e : events_) {
    if (!(e.start <= e.end))
      throw std::invalid_argument("accent event with start > end");
  }
  std::sort(events_.begin(), events_.end(),
            [](const AccentEvent &a, const AccentEvent &b) {
              if (a.Center() != b.Center()) return a.Center() < b.Center();
              return a.start < b.start;
            });
  auto last = std::unique(events_.begin(), events_.end(),
                          [](const AccentEvent &a, const AccentEvent &b) {
                            return a.start == b.start && a.end == b.end;
                          });
  events_.erase(last, events_.end());
}

AccentEvent EventSet::FromPoint(double time, double frame_period) {
  return AccentEvent{time - 0.5 * frame_period, time + 0.5 * frame_period};
}

bool FrameTrack::IsBinary() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

void FrameTrack::Validate() const {
  if (!(frame_period > 0.0))
    throw std::invalid_argument("frame track with non-positive frame period");
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("frame track value outside [0,1]");
  }
}

void Utterance::Validate() const {
  if (!(duration > 0.0))
    throw std::invalid_argument("utterance " + id + ": non-positive duration");
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].start > words[i].end)
      throw std::invalid_argument("utterance " + id + ": inverted word span");
    if (i > 0 && words[i].start < words[i - 1].end - kTimeEps)
      throw std::invalid_argument("utterance " + id +
                                  ": overlapping or unsorted words");
  }
  for (const auto &e : accents.events()) {
    if (e.start < -kTimeEps || e.end > duration + kTimeEps)
      throw std::invalid_argument("utterance " + id +
                                  ": accent event outside [0, duration]");
  }
  if (feature_dim > 0) {
    if (features.size() % feature_dim != 0 ||
        num_frames() != NumFrames(duration, frame_period))
      throw std::invalid_argument("utterance " + id +
                                  ": feature length does not match duration");
  }
}

std::vector<ClipWindow> SplitIntoClips(double duration, double window,
                                       double stride,
                                       const std::string &utterance_id) {
  if (!(duration > 0.0))
    throw std::invalid_argument("clip split: duration must be positive");
  if (!(stride > 0.0))
    throw std::invalid_argument("clip split: stride must be positive");
  if (!(window >= stride))
    throw std::invalid_argument("clip split: window must be >= stride");
  std::vector<ClipWindow> clips;
  double prev_end = 0.0;
  for (std::size_t k = 0;; ++k) {
    double start = static_cast<double>(k) * stride;
    if (start >= duration) break;
    double end = std::min(start + window, duration);
    if (!clips.empty() && end <= prev_end) break;
    clips.push_back({utterance_id, start, end});
    prev_end = end;
    if (end >= duration) break;
  }
  return clips;
}

FrameTrack EventsToFrames(const EventSet &events, double duration,
                          double frame_period) {
  if (!(frame_period > 0.0))
    throw std::invalid_argument("frame_period must be positive");
  for (const auto &e : events.events()) {
    if (e.start < -kTimeEps || e.end > duration + kTimeEps)
      throw std::invalid_argument("accent event outside [0, duration]");
  }
  FrameTrack track;
  track.frame_period = frame_period;
  track.values.assign(NumFrames(duration, frame_period), 0.0);
  for (std::size_t i = 0; i < track.values.size(); ++i) {
    double mid = (static_cast<double>(i) + 0.5) * frame_period;
    for (const auto &e : events.events()) {
      if (mid >= e.start && mid < e.end) {
        track.values[i] = 1.0;
        break;
      }
    }
  }
  return track;
}

EventSet FramesToEvents(const FrameTrack &scores, double threshold) {
  std::vector<AccentEvent> out;
  const auto &v = scores.values;
  std::size_t i = 0;
  while (i < v.size()) {
    if (v[i] < threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] >= threshold) ++j;
    out.push_back({static_cast<double>(i) * scores.frame_period,
                   static_cast<double>(j + 1) * scores.frame_period});
    i = j + 1;
  }
  return EventSet(std::move(out));
}

FrameTrack MergeClipScores(
    const std::vector<std::pair<ClipWindow, FrameTrack>> &clips) {
  if (clips.empty())
    throw std::invalid_argument("merge: no clips given");
  const double period = clips.front().second.frame_period;
  double duration = 0.0;
  for (const auto &[clip, track] : clips) {
    if (std::abs(track.frame_period - period) > 1e-12)
      throw std::invalid_argument("merge: clips disagree on frame period");
    if (!(clip.end > clip.start))
      throw std::invalid_argument("merge: empty clip window");
    duration = std::max(duration, clip.end);
  }
  const std::size_t n = NumFrames(duration, period);
  std::vector<double> sum(n, 0.0);
  std::vector<int> count(n, 0);
  for (const auto &[clip, track] : clips) {
    const long offset = std::lround(clip.start / period);
    const std::size_t clip_frames = NumFrames(clip.end - clip.start, period);
    const std::size_t usable = std::min(clip_frames, track.size());
    for (std::size_t j = 0; j < usable; ++j) {
      const long i = offset + static_cast<long>(j);
      if (i < 0 || static_cast<std::size_t>(i) >= n) continue;
      sum[i] += track.values[j];
      count[i] += 1;
    }
  }
  FrameTrack merged;
  merged.frame_period = period;
  merged.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0)
      throw std::invalid_argument("merge: gap in clip coverage at frame " +
                                  std::to_string(i));
    merged.values[i] = sum[i] / count[i];
  }
  return merged;
}

CorpusSplit MakeSplits(const std::vector<Utterance> &corpus,
                       const SplitRatios &ratios, std::uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("split: empty corpus");
  if (ratios.train < 0 || ratios.dev < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    throw std::invalid_argument("split: ratios must be non-negative and sum to 1");

  // Stories in first-seen order, then shuffled by seed.
  std::map<std::string, std::vector<std::string>> by_story;
  std::vector<std::string> stories;
  for (const auto &u : corpus) {
    auto [it, inserted] = by_story.try_emplace(u.story_id);
    if (inserted) stories.push_back(u.story_id);
    it->second.push_back(u.id);
  }
  if (stories.size() < 2)
    throw ConfigError(
        "split: train/test story disjointness needs at least two stories");
  std::sort(stories.begin(), stories.end());
  std::mt19937_64 rng(seed);
  std::shuffle(stories.begin(), stories.end(), rng);

  const double total = static_cast<double>(corpus.size());
  const double target_test = ratios.test * total;
  const double target_dev = ratios.dev * total;

  std::vector<bool> used(stories.size(), false);
  // Adds stories, in shuffled order, whenever doing so moves the bucket's
  // utterance count closer to its target.
  auto fill = [&](double target, std::vector<std::string> *bucket) {
    double have = 0.0;
    for (std::size_t s = 0; s < stories.size(); ++s) {
      if (used[s]) continue;
      const auto &ids = by_story[stories[s]];
      double after = have + static_cast<double>(ids.size());
      if (std::abs(after - target) < std::abs(have - target) - 1e-12) {
        used[s] = true;
        have = after;
        bucket->insert(bucket->end(), ids.begin(), ids.end());
      }
    }
  };

  CorpusSplit split;
  fill(target_test, &split.test);
  if (split.test.empty() && ratios.test > 0) {
    // Smallest story goes to test so that test is never silently empty.
    std::size_t best = stories.size();
    for (std::size_t s = 0; s < stories.size(); ++s)
      if (best == stories.size() ||
          by_story[stories[s]].size() < by_story[stories[best]].size())
        best = s;
    used[best] = true;
    const auto &ids = by_story[stories[best]];
    split.test.insert(split.test.end(), ids.begin(), ids.end());
  }
  fill(target_dev, &split.dev);
  for (std::size_t s = 0; s < stories.size(); ++s) {
    if (used[s]) continue;
    const auto &ids = by_story[stories[s]];
    split.train.insert(split.train.end(), ids.begin(), ids.end());
  }
  if (split.train.empty())
    throw ConfigError("split: no stories left for the training set");
  return split;
}

}  // namespace prosody
