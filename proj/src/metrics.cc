// metrics.cc

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

#include "prosody/metrics.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prosody {

void ScoringConfig::Validate() const {
  for (std::size_t i = 0; i < tolerances_ms.size(); ++i) {
    if (!(tolerances_ms[i] >= 0.0))
      throw std::invalid_argument("tolerances must be non-negative");
    if (i > 0 && tolerances_ms[i] < tolerances_ms[i - 1])
      throw std::invalid_argument("tolerances must be sorted ascending");
  }
}

double Anchor(const AccentEvent &e, MatchAnchor anchor) {
  return anchor == MatchAnchor::kCenter ? e.Center() : e.start;
}

namespace {

// Greedy sweep over anchors sorted ascending. A hypothesis left behind by the
// current reference (too early) is too early for every later reference too,
// so the sweep never revisits it; this yields a maximum matching for a
// uniform window.
MatchResult GreedySweep(const std::vector<double> &ref,
                        const std::vector<double> &hyp, double tol_s) {
  MatchResult m;
  std::size_t j = 0;
  for (std::size_t i = 0; i < ref.size() && j < hyp.size(); ++i) {
    while (j < hyp.size() && hyp[j] < ref[i] - tol_s) ++j;
    if (j < hyp.size() && hyp[j] <= ref[i] + tol_s) {
      m.pairs.emplace_back(i, j);
      ++j;
    }
  }
  m.tp = m.pairs.size();
  m.fp = hyp.size() - m.tp;
  m.fn = ref.size() - m.tp;
  return m;
}

double ToleranceSeconds(double tol_ms) {
  if (!(tol_ms >= 0.0)) throw std::invalid_argument("negative tolerance");
  return tol_ms / 1000.0 + kToleranceSlackSeconds;
}

}  // namespace

MatchResult MatchEvents(std::span<const AccentEvent> ref,
                        std::span<const AccentEvent> hyp, double tol_ms,
                        MatchAnchor anchor) {
  std::vector<double> r, h;
  for (const auto &e : ref) r.push_back(Anchor(e, anchor));
  for (const auto &e : hyp) h.push_back(Anchor(e, anchor));
  if (!std::is_sorted(r.begin(), r.end()) || !std::is_sorted(h.begin(), h.end()))
    throw std::invalid_argument("match: events must be sorted by anchor");
  return GreedySweep(r, h, ToleranceSeconds(tol_ms));
}

MatchResult MatchEvents(const EventSet &ref, const EventSet &hyp, double tol_ms,
                        MatchAnchor anchor) {
  if (anchor == MatchAnchor::kCenter)
    return MatchEvents(std::span(ref.events()), std::span(hyp.events()), tol_ms,
                       anchor);
  // EventSet is ordered by center; reorder by onset and map indices back.
  auto order = [anchor](const EventSet &s) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return Anchor(s[a], anchor) < Anchor(s[b], anchor);
    });
    return idx;
  };
  const auto ri = order(ref), hi = order(hyp);
  std::vector<double> r, h;
  for (auto i : ri) r.push_back(Anchor(ref[i], anchor));
  for (auto i : hi) h.push_back(Anchor(hyp[i], anchor));
  MatchResult m = GreedySweep(r, h, ToleranceSeconds(tol_ms));
  for (auto &[a, b] : m.pairs) {
    a = ri[a];
    b = hi[b];
  }
  return m;
}

PrfReport Prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  const double s = r.precision + r.recall;
  r.f1 = s > 0 ? 2.0 * r.precision * r.recall / s : 0.0;
  return r;
}

PrfReport Prf(const MatchResult &m) { return Prf(m.tp, m.fp, m.fn); }

std::vector<PrfReport> ToleranceSweep(const EventSet &ref, const EventSet &hyp,
                                      const ScoringConfig &cfg) {
  return ToleranceSweep({{ref, hyp}}, cfg);
}

std::vector<PrfReport> ToleranceSweep(
    const std::vector<std::pair<EventSet, EventSet>> &ref_hyp,
    const ScoringConfig &cfg) {
  cfg.Validate();
  std::vector<PrfReport> rows;
  for (double tol : cfg.tolerances_ms) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto &[ref, hyp] : ref_hyp) {
      MatchResult m = MatchEvents(ref, hyp, tol, cfg.match_on);
      tp += m.tp;
      fp += m.fp;
      fn += m.fn;
    }
    PrfReport row = Prf(tp, fp, fn);
    row.tolerance_ms = tol;
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> SplitWords(const std::string &text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

ErrorRateReport Wer(const std::string &ref, const std::string &hyp) {
  return EditDistance(SplitWords(ref), SplitWords(hyp));
}

ErrorRateReport Cer(const std::string &ref, const std::string &hyp) {
  return EditDistance(ref, hyp);
}

ErrorRateReport Accumulate(const std::vector<ErrorRateReport> &reports) {
  ErrorRateReport total;
  for (const auto &r : reports) {
    total.substitutions += r.substitutions;
    total.insertions += r.insertions;
    total.deletions += r.deletions;
    total.ref_length += r.ref_length;
  }
  total.rate = total.ref_length > 0
                   ? static_cast<double>(total.errors()) / total.ref_length
                   : static_cast<double>(total.errors());
  return total;
}

}  // namespace prosody
