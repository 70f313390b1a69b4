// ctc.cc

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

#include "prosody/ctc.h"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace prosody {

double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

namespace {

double LogSumExp(std::span<const double> row) {
  double acc = kLogZero;
  for (double v : row) acc = LogAdd(acc, v);
  return acc;
}

// Blank-augmented label sequence: blank, l1, blank, l2, ..., blank.
std::vector<int> Extend(const LabelSeq &target) {
  std::vector<int> ext(2 * target.size() + 1, kBlank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

void CheckTarget(const LogProbGrid &grid, const LabelSeq &target) {
  for (int tok : target) {
    if (tok < 1 || static_cast<std::size_t>(tok) >= grid.vocab())
      throw std::invalid_argument("ctc: target token " + std::to_string(tok) +
                                  " outside [1, V-1]");
  }
}

// alpha[t * S + s]: log-probability of all prefixes of alignments ending in
// extended state s at frame t, emissions up to and including t.
std::vector<double> Alpha(const LogProbGrid &grid, const std::vector<int> &ext) {
  const std::size_t T = grid.frames(), S = ext.size();
  std::vector<double> alpha(T * S, kLogZero);
  alpha[0] = grid(0, ext[0]);
  if (S > 1) alpha[1] = grid(0, ext[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha[(t - 1) * S + s];
      if (s >= 1) a = LogAdd(a, alpha[(t - 1) * S + s - 1]);
      if (s >= 2 && ext[s] != kBlank && ext[s] != ext[s - 2])
        a = LogAdd(a, alpha[(t - 1) * S + s - 2]);
      alpha[t * S + s] = a <= kLogZero ? kLogZero : a + grid(t, ext[s]);
    }
  }
  return alpha;
}

// beta[t * S + s]: log-probability of emitting frames t+1..T-1 and finishing,
// given the alignment is in state s at frame t.
std::vector<double> Beta(const LogProbGrid &grid, const std::vector<int> &ext) {
  const std::size_t T = grid.frames(), S = ext.size();
  std::vector<double> beta(T * S, kLogZero);
  beta[(T - 1) * S + S - 1] = 0.0;
  if (S > 1) beta[(T - 1) * S + S - 2] = 0.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta[(t + 1) * S + s] + grid(t + 1, ext[s]);
      if (s + 1 < S)
        b = LogAdd(b, beta[(t + 1) * S + s + 1] + grid(t + 1, ext[s + 1]));
      if (s + 2 < S && ext[s + 2] != kBlank && ext[s + 2] != ext[s])
        b = LogAdd(b, beta[(t + 1) * S + s + 2] + grid(t + 1, ext[s + 2]));
      beta[t * S + s] = b <= kLogZero / 2 ? kLogZero : b;
    }
  }
  return beta;
}

double FinalLogProb(const std::vector<double> &alpha, std::size_t T,
                    std::size_t S) {
  double p = alpha[(T - 1) * S + S - 1];
  if (S > 1) p = LogAdd(p, alpha[(T - 1) * S + S - 2]);
  return p;
}

}  // namespace

LogProbGrid LogProbGrid::FromLogits(std::size_t frames, std::size_t vocab,
                                    std::span<const double> logits) {
  if (logits.size() != frames * vocab)
    throw std::invalid_argument("logit matrix has wrong size");
  LogProbGrid grid(frames, vocab);
  for (std::size_t t = 0; t < frames; ++t) {
    auto row = logits.subspan(t * vocab, vocab);
    const double z = LogSumExp(row);
    for (std::size_t v = 0; v < vocab; ++v) grid(t, v) = row[v] - z;
  }
  return grid;
}

double LogProbGrid::MaxRowNormError() const {
  double worst = 0.0;
  for (std::size_t t = 0; t < frames_; ++t)
    worst = std::max(worst, std::abs(LogSumExp(Row(t))));
  return worst;
}

Vocabulary::Vocabulary(std::string chars) : chars_(std::move(chars)) {
  std::string sorted = chars_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("vocabulary has duplicate characters");
}

char Vocabulary::Char(int index) const {
  if (index < 1 || static_cast<std::size_t>(index) > chars_.size())
    throw std::invalid_argument("vocabulary index out of range");
  return chars_[index - 1];
}

LabelSeq Vocabulary::Encode(const std::string &text) const {
  LabelSeq out;
  out.reserve(text.size());
  for (char c : text) {
    auto pos = chars_.find(c);
    if (pos == std::string::npos)
      throw std::invalid_argument(std::string("character '") + c +
                                  "' not in vocabulary");
    out.push_back(static_cast<int>(pos) + 1);
  }
  return out;
}

std::string Vocabulary::Decode(const LabelSeq &labels) const {
  std::string out;
  for (int l : labels) out.push_back(Char(l));
  return out;
}

std::size_t MinCtcFrames(const LabelSeq &target) {
  std::size_t n = target.size();
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

CtcLoss CtcForward(const LogProbGrid &grid, const LabelSeq &target) {
  CheckTarget(grid, target);
  CtcLoss loss;
  if (grid.frames() == 0 || MinCtcFrames(target) > grid.frames()) return loss;
  const auto ext = Extend(target);
  const auto alpha = Alpha(grid, ext);
  const double lp = FinalLogProb(alpha, grid.frames(), ext.size());
  if (lp > kLogZero / 2) loss.nll = -lp;
  return loss;
}

CtcGradient CtcGrad(const LogProbGrid &grid, const LabelSeq &target) {
  CheckTarget(grid, target);
  const std::size_t T = grid.frames(), V = grid.vocab();
  if (T == 0 || MinCtcFrames(target) > T)
    throw std::invalid_argument("ctc: target infeasible for grid length");
  const auto ext = Extend(target);
  const std::size_t S = ext.size();
  const auto alpha = Alpha(grid, ext);
  const auto beta = Beta(grid, ext);
  const double lp = FinalLogProb(alpha, T, S);
  if (lp <= kLogZero / 2)
    throw std::invalid_argument("ctc: no alignment has non-zero probability");

  CtcGradient out;
  out.loss.nll = -lp;
  out.grad.assign(T * V, 0.0);
  std::vector<double> occupancy(V);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kLogZero);
    for (std::size_t s = 0; s < S; ++s) {
      const double a = alpha[t * S + s], b = beta[t * S + s];
      if (a <= kLogZero || b <= kLogZero) continue;
      occupancy[ext[s]] = LogAdd(occupancy[ext[s]], a + b - lp);
    }
    const double z = LogSumExp(grid.Row(t));
    for (std::size_t v = 0; v < V; ++v) {
      const double softmax = std::exp(grid(t, v) - z);
      const double post = occupancy[v] <= kLogZero ? 0.0 : std::exp(occupancy[v]);
      out.grad[t * V + v] = softmax - post;
    }
  }
  return out;
}

LabelSeq GreedyDecode(const LogProbGrid &grid) {
  LabelSeq out;
  int prev = kBlank;
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    int best = 0;
    for (std::size_t v = 1; v < grid.vocab(); ++v)
      if (grid(t, v) > grid(t, best)) best = static_cast<int>(v);
    if (best != kBlank && best != prev) out.push_back(best);
    prev = best;
  }
  return out;
}

namespace {

struct Hyp {
  double blank = kLogZero;     // ends in blank
  double non_blank = kLogZero; // ends in the last label
  double lm = 0.0;             // accumulated lm_weight * log P_lm
};

struct Ranked {
  const LabelSeq *prefix;
  double score;
};

bool Better(const Ranked &a, const Ranked &b) {
  if (a.score != b.score) return a.score > b.score;
  return *a.prefix < *b.prefix;
}

}  // namespace

LabelSeq BeamDecode(const LogProbGrid &grid, const BeamOptions &opts,
                    const TokenLm *lm) {
  if (opts.width == 0) throw std::invalid_argument("beam width must be >= 1");
  const std::size_t V = grid.vocab();
  auto lm_term = [&](const LabelSeq &prefix, int token) {
    if (lm == nullptr || opts.lm_weight == 0.0) return 0.0;
    return opts.lm_weight * lm->LogProb(prefix, token);
  };
  auto score = [&](const LabelSeq &prefix, const Hyp &h) {
    return LogAdd(h.blank, h.non_blank) + h.lm +
           opts.bonus * static_cast<double>(prefix.size());
  };

  std::map<LabelSeq, Hyp> beam;
  beam[LabelSeq{}] = Hyp{0.0, kLogZero, 0.0};
  for (std::size_t t = 0; t < grid.frames(); ++t) {
    std::map<LabelSeq, Hyp> next;
    for (const auto &[prefix, h] : beam) {
      const double total = LogAdd(h.blank, h.non_blank);
      {
        Hyp &same = next.try_emplace(prefix, Hyp{kLogZero, kLogZero, h.lm})
                        .first->second;
        same.blank = LogAdd(same.blank, total + grid(t, kBlank));
        if (!prefix.empty())
          same.non_blank =
              LogAdd(same.non_blank, h.non_blank + grid(t, prefix.back()));
      }
      for (std::size_t v = 1; v < V; ++v) {
        const int tok = static_cast<int>(v);
        LabelSeq extended = prefix;
        extended.push_back(tok);
        auto [it, inserted] = next.try_emplace(std::move(extended), Hyp{});
        if (inserted) it->second.lm = h.lm + lm_term(prefix, tok);
        // A repeated label only extends the prefix after a blank.
        const double from = (!prefix.empty() && prefix.back() == tok)
                                ? h.blank
                                : total;
        it->second.non_blank =
            LogAdd(it->second.non_blank, from + grid(t, tok));
      }
    }
    std::vector<Ranked> ranked;
    ranked.reserve(next.size());
    for (const auto &[prefix, h] : next)
      ranked.push_back({&prefix, score(prefix, h)});
    if (ranked.size() > opts.width) {
      std::partial_sort(ranked.begin(), ranked.begin() + opts.width,
                        ranked.end(), Better);
      ranked.resize(opts.width);
    }
    std::map<LabelSeq, Hyp> pruned;
    for (const auto &r : ranked) pruned.emplace(*r.prefix, next.at(*r.prefix));
    beam = std::move(pruned);
  }

  const LabelSeq *best = nullptr;
  double best_score = 0.0;
  for (const auto &[prefix, h] : beam) {
    double s = score(prefix, h);
    if (lm != nullptr && opts.lm_weight != 0.0)
      s += opts.lm_weight * lm->LogProbEnd(prefix);
    Ranked cand{&prefix, s};
    if (best == nullptr || Better(cand, Ranked{best, best_score})) {
      best = &prefix;
      best_score = s;
    }
  }
  return best == nullptr ? LabelSeq{} : *best;
}

}  // namespace prosody
