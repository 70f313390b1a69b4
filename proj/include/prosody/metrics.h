// prosody/metrics.h

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

#ifndef PROSODY_METRICS_H_
#define PROSODY_METRICS_H_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prosody/corpus.h"

namespace prosody {

enum class MatchAnchor { kCenter, kOnset };

struct ScoringConfig {
  std::vector<double> tolerances_ms = {0, 40, 80, 100};
  MatchAnchor match_on = MatchAnchor::kCenter;

  void Validate() const;
};

/// Slack added to the inclusive tolerance test, so that offsets which are
/// equal in decimal (e.g. 1.05 - 1.00 vs 50 ms) still compare equal.
constexpr double kToleranceSlackSeconds = 1e-9;

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (ref, hyp)
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct PrfReport {
  double tolerance_ms = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

/// Maximum-cardinality one-to-one matching of events whose anchors differ by
/// at most `tol_ms` (inclusive). Both sets must be sorted by anchor.
MatchResult MatchEvents(const EventSet &ref, const EventSet &hyp, double tol_ms,
                        MatchAnchor anchor = MatchAnchor::kCenter);
/// As above on raw sequences; throws std::invalid_argument unless each is
/// sorted ascending by the anchor.
MatchResult MatchEvents(std::span<const AccentEvent> ref,
                        std::span<const AccentEvent> hyp, double tol_ms,
                        MatchAnchor anchor = MatchAnchor::kCenter);

double Anchor(const AccentEvent &e, MatchAnchor anchor);

/// Precision, recall and F1 from counts; 0/0 is taken as 0.
PrfReport Prf(const MatchResult &m);
PrfReport Prf(std::size_t tp, std::size_t fp, std::size_t fn);

std::vector<PrfReport> ToleranceSweep(const EventSet &ref, const EventSet &hyp,
                                      const ScoringConfig &cfg = {});

/// Sums tp/fp/fn over many utterances (micro average) per tolerance.
std::vector<PrfReport> ToleranceSweep(
    const std::vector<std::pair<EventSet, EventSet>> &ref_hyp,
    const ScoringConfig &cfg = {});

struct ErrorRateReport {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_length = 0;
  double rate = 0.0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
};

namespace internal {
// Levenshtein DP over index-comparable sequences; fills S/I/D only.
template <typename Seq>
ErrorRateReport EditCounts(const Seq &ref, const Seq &hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  for (std::size_t i = 0; i <= n; ++i) cost[at(i, 0)] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[at(0, j)] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = cost[at(i - 1, j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      std::size_t ins = cost[at(i, j - 1)] + 1;
      std::size_t del = cost[at(i - 1, j)] + 1;
      cost[at(i, j)] = std::min(sub, std::min(ins, del));
    }
  }
  // Backtrace; on ties prefer substitution/match, then insertion, then
  // deletion.
  ErrorRateReport r;
  r.ref_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = cost[at(i, j)];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[at(i - 1, j - 1)] + (same ? 0 : 1) == here) {
        if (!same) ++r.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && cost[at(i, j - 1)] + 1 == here) {
      ++r.insertions;
      --j;
      continue;
    }
    ++r.deletions;
    --i;
  }
  return r;
}
}  // namespace internal

/// Minimal substitutions + insertions + deletions turning `hyp` into `ref`.
/// `rate` is errors / |ref| (or |hyp| when ref is empty).
template <typename Seq>
ErrorRateReport EditDistance(const Seq &ref, const Seq &hyp) {
  ErrorRateReport r = internal::EditCounts(ref, hyp);
  if (r.ref_length > 0)
    r.rate = static_cast<double>(r.errors()) / static_cast<double>(r.ref_length);
  else
    r.rate = static_cast<double>(hyp.size());
  return r;
}

std::vector<std::string> SplitWords(const std::string &text);

/// Word error rate over whitespace-split tokens of normalized text.
ErrorRateReport Wer(const std::string &ref, const std::string &hyp);
/// Character error rate, internal spaces included.
ErrorRateReport Cer(const std::string &ref, const std::string &hyp);

/// Corpus-level rate: total errors over total reference length.
ErrorRateReport Accumulate(const std::vector<ErrorRateReport> &reports);

}  // namespace prosody

#endif  // PROSODY_METRICS_H_
