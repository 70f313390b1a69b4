// normalize.cc

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

#include "prosody/normalize.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prosody {

namespace {

// Lenient UTF-8 decoder: malformed bytes decode to themselves.
std::u32string DecodeUtf8(const std::string &s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = s[i];
    int extra = 0;
    char32_t cp = c;
    if (c >= 0xF0 && c < 0xF8) {
      extra = 3;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    }
    if (extra > 0 && i + extra < s.size()) {
      bool ok = true;
      for (int k = 1; k <= extra && ok; ++k)
        ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
      if (ok) {
        for (int k = 1; k <= extra; ++k)
          cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(cp);
        i += extra + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

void AppendUtf8(char32_t cp, std::string *out) {
  if (cp < 0x80) {
    out->push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool IsSpace(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x00A0;
}

bool IsPunct(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
                       (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  switch (c) {
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014:
    case 0x2015: case 0x2018: case 0x2019: case 0x201C: case 0x201D:
    case 0x2026: case 0x00AB: case 0x00BB: case 0x00BF: case 0x00A1:
      return true;
    default:
      return false;
  }
}

bool IsWordChar(char32_t c) { return !IsSpace(c) && !IsPunct(c); }

char32_t FoldApostrophe(char32_t c) { return c == 0x2019 ? U'\'' : c; }

char32_t Upper(char32_t c) {
  return (c >= U'a' && c <= U'z') ? c - (U'a' - U'A') : c;
}

}  // namespace

bool NormalizationRule::Matches(char32_t c, bool word_internal) const {
  if (inner_only && !word_internal) return false;
  if (punct_class) return IsPunct(c);
  return chars.find(c) != std::u32string::npos;
}

bool NormalizationRules::Keep(char32_t c, bool word_internal) const {
  for (const auto &rule : rules_) {
    if (rule.Matches(c, word_internal))
      return rule.action == NormalizationRule::Action::kKeep;
  }
  return true;
}

NormalizationRules NormalizationRules::Default() {
  std::istringstream in("KEEP '\nKEEP inner:.\nDROP [:punct:]\n");
  return Parse(in);
}

NormalizationRules NormalizationRules::Parse(std::istream &in) {
  NormalizationRules result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    std::size_t sp = line.find_first_of(" \t");
    if (sp == std::string::npos)
      throw std::invalid_argument("normalization rule line " +
                                  std::to_string(line_no) +
                                  ": expected '<KEEP|DROP> <char-class>'");
    std::string verb = line.substr(0, sp);
    std::string cls = line.substr(line.find_first_not_of(" \t", sp));
    NormalizationRule rule;
    if (verb == "KEEP") {
      rule.action = NormalizationRule::Action::kKeep;
    } else if (verb == "DROP") {
      rule.action = NormalizationRule::Action::kDrop;
    } else {
      throw std::invalid_argument("normalization rule line " +
                                  std::to_string(line_no) +
                                  ": unknown action '" + verb + "'");
    }
    const std::string kInner = "inner:";
    if (cls.rfind(kInner, 0) == 0) {
      rule.inner_only = true;
      cls = cls.substr(kInner.size());
    }
    if (cls == "[:punct:]") {
      rule.punct_class = true;
    } else {
      rule.chars = DecodeUtf8(cls);
      for (auto &c : rule.chars) c = FoldApostrophe(c);
    }
    if (!rule.punct_class && rule.chars.empty())
      throw std::invalid_argument("normalization rule line " +
                                  std::to_string(line_no) +
                                  ": empty character class");
    result.rules_.push_back(std::move(rule));
  }
  return result;
}

NormalizationRules NormalizationRules::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule file " + path);
  return Parse(in);
}

std::string NormalizeTranscript(const std::string &raw,
                                const NormalizationRules &rules) {
  std::u32string text = DecodeUtf8(raw);
  for (auto &c : text) c = FoldApostrophe(c);

  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j == i) break;
    // Word is text[i, j). A character is internal when word characters
    // occur on both sides of it inside the word.
    std::size_t first_word = j, last_word = i;
    for (std::size_t k = i; k < j; ++k) {
      if (IsWordChar(text[k])) {
        first_word = std::min(first_word, k);
        last_word = k;
      }
    }
    std::string word;
    for (std::size_t k = i; k < j; ++k) {
      char32_t c = text[k];
      bool internal = first_word < k && k < last_word;
      if (!IsWordChar(c) && !rules.Keep(c, internal)) continue;
      AppendUtf8(Upper(c), &word);
    }
    if (!word.empty()) {
      if (!out.empty()) out.push_back(' ');
      out += word;
    }
    i = j;
  }
  return out;
}

std::string NormalizeTranscript(const std::string &raw) {
  static const NormalizationRules kDefault = NormalizationRules::Default();
  return NormalizeTranscript(raw, kDefault);
}

}  // namespace prosody
