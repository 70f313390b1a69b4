// ngram.cc

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

#include "prosody/ngram.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace prosody {

int NGramLm::Symbol(char c) const {
  auto pos = alphabet_.find(c);
  if (pos == std::string::npos)
    throw std::invalid_argument(std::string("character '") + c +
                                "' not in LM alphabet");
  return static_cast<int>(pos);
}

NGramLm::Context NGramLm::ContextFor(std::string_view history) const {
  if (order_ <= 1) return {};
  const int boundary = static_cast<int>(alphabet_.size());
  Context ctx(order_ - 1, boundary);
  const std::size_t take = std::min(history.size(), order_ - 1);
  for (std::size_t i = 0; i < take; ++i)
    ctx[order_ - 1 - take + i] = Symbol(history[history.size() - take + i]);
  return ctx;
}

double NGramLm::LogProbSymbol(const Context &ctx, int symbol) const {
  const double k = static_cast<double>(NumOutcomes());
  auto it = counts_.find(ctx);
  if (it == counts_.end()) return -std::log(k);
  std::uint64_t total = 0;
  for (auto c : it->second) total += c;
  return std::log((static_cast<double>(it->second[symbol]) + 1.0) /
                  (static_cast<double>(total) + k));
}

double NGramLm::LogProb(std::string_view history, char c) const {
  return LogProbSymbol(ContextFor(history), Symbol(c));
}

double NGramLm::LogProbEnd(std::string_view history) const {
  if (order_ <= 1) return 0.0;
  return LogProbSymbol(ContextFor(history), static_cast<int>(alphabet_.size()));
}

std::vector<double> NGramLm::Distribution(std::string_view history) const {
  const Context ctx = ContextFor(history);
  std::vector<double> p(NumOutcomes());
  for (std::size_t s = 0; s < p.size(); ++s)
    p[s] = std::exp(LogProbSymbol(ctx, static_cast<int>(s)));
  return p;
}

NGramLm TrainNGram(const std::vector<std::string> &texts, std::size_t order,
                   const std::string &alphabet) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
  if (texts.empty()) throw std::invalid_argument("n-gram: no training texts");
  NGramLm lm;
  lm.order_ = order;
  if (alphabet.empty()) {
    std::set<char> chars;
    for (const auto &t : texts) chars.insert(t.begin(), t.end());
    lm.alphabet_.assign(chars.begin(), chars.end());
  } else {
    lm.alphabet_ = alphabet;
  }
  const std::size_t outcomes = lm.NumOutcomes();
  const int boundary = static_cast<int>(lm.alphabet_.size());
  for (const auto &text : texts) {
    std::vector<int> seq(order - 1, boundary);
    for (char c : text) seq.push_back(lm.Symbol(c));
    if (order >= 2) seq.push_back(boundary);
    for (std::size_t i = order - 1; i < seq.size(); ++i) {
      NGramLm::Context ctx(seq.begin() + (i - (order - 1)), seq.begin() + i);
      auto &row = lm.counts_[ctx];
      if (row.empty()) row.assign(outcomes, 0);
      row[seq[i]] += 1;
    }
  }
  return lm;
}

std::string NGramLm::ToJson() const {
  nlohmann::json j;
  j["order"] = order_;
  j["alphabet"] = alphabet_;
  j["boundary"] = alphabet_.size();
  // Flattened tables: contexts[i] (symbol ids) owns counts[i].
  nlohmann::json contexts = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::array();
  for (const auto &[ctx, row] : counts_) {
    contexts.push_back(ctx);
    counts.push_back(row);
  }
  j["contexts"] = contexts;
  j["counts"] = counts;
  return j.dump();
}

NGramLm NGramLm::FromJson(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error(std::string("LM file: ") + e.what());
  }
  NGramLm lm;
  lm.order_ = j.at("order").get<std::size_t>();
  lm.alphabet_ = j.at("alphabet").get<std::string>();
  if (lm.order_ < 1) throw std::runtime_error("LM file: order must be >= 1");
  const auto &contexts = j.at("contexts");
  const auto &counts = j.at("counts");
  if (contexts.size() != counts.size())
    throw std::runtime_error("LM file: contexts/counts length mismatch");
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    auto ctx = contexts[i].get<Context>();
    auto row = counts[i].get<std::vector<std::uint64_t>>();
    if (ctx.size() != lm.order_ - 1 || row.size() != lm.NumOutcomes())
      throw std::runtime_error("LM file: table " + std::to_string(i) +
                               " has wrong shape");
    lm.counts_[std::move(ctx)] = std::move(row);
  }
  return lm;
}

void NGramLm::Save(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << ToJson() << '\n';
}

NGramLm NGramLm::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

CharLmScorer::CharLmScorer(const NGramLm &lm, const Vocabulary &vocab)
    : lm_(lm), vocab_(vocab) {
  for (char c : vocab.chars())
    if (lm.alphabet().find(c) == std::string::npos)
      throw std::invalid_argument(std::string("LM alphabet lacks '") + c + "'");
}

std::string CharLmScorer::ToText(std::span<const int> history) const {
  std::string text;
  const std::size_t keep = lm_.order() > 0 ? lm_.order() - 1 : 0;
  const std::size_t from = history.size() > keep ? history.size() - keep : 0;
  for (std::size_t i = from; i < history.size(); ++i)
    text.push_back(vocab_.Char(history[i]));
  return text;
}

double CharLmScorer::LogProb(std::span<const int> history, int token) const {
  return lm_.LogProb(ToText(history), vocab_.Char(token));
}

double CharLmScorer::LogProbEnd(std::span<const int> history) const {
  return lm_.LogProbEnd(ToText(history));
}

}  // namespace prosody
