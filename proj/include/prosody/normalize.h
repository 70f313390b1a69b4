// prosody/normalize.h

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

#ifndef PROSODY_NORMALIZE_H_
#define PROSODY_NORMALIZE_H_

#include <istream>
#include <string>
#include <vector>

namespace prosody {

// Transcript normalization is driven by an ordered rule table. Each line of a
// rule file is
//
//   KEEP <char-class>
//   DROP <char-class>
//
// where <char-class> is one of
//   [:punct:]      ASCII punctuation plus common Unicode dashes and quotes
//   inner:<chars>  the listed characters, only when word-internal (there is a
//                  letter or digit both before and after it in the word)
//   <chars>        the listed characters, anywhere
//
// Blank lines and lines starting with '#' are ignored. The first matching
// rule wins; characters no rule matches are kept. Letters are uppercased
// (ASCII only) and whitespace runs collapse to one space.

struct NormalizationRule {
  enum class Action { kKeep, kDrop };
  Action action = Action::kKeep;
  bool punct_class = false;
  bool inner_only = false;
  std::u32string chars;

  bool Matches(char32_t c, bool word_internal) const;
};

class NormalizationRules {
 public:
  /// KEEP ', KEEP inner:., DROP [:punct:].
  static NormalizationRules Default();
  /// Throws std::invalid_argument on a malformed line (line number in
  /// the message).
  static NormalizationRules Parse(std::istream &in);
  static NormalizationRules Load(const std::string &path);

  const std::vector<NormalizationRule> &rules() const { return rules_; }
  bool Keep(char32_t c, bool word_internal) const;

 private:
  std::vector<NormalizationRule> rules_;
};

std::string NormalizeTranscript(const std::string &raw,
                                const NormalizationRules &rules);
std::string NormalizeTranscript(const std::string &raw);

}  // namespace prosody

#endif  // PROSODY_NORMALIZE_H_
