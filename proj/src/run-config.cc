// run-config.cc

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

#include "prosody/run-config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace prosody {

namespace {

std::string Trim(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception &) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t ToUint(const std::string &key, const std::string &v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception &) {
    throw ConfigError(key + ": integer out of range: '" + v + "'");
  }
}

bool ToBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string FromDouble(double d) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

struct Field {
  std::string name;  // section.key
  std::function<void(RunConfig &, const std::string &)> set;
  std::function<std::string(const RunConfig &)> get;
};

#define PROSODY_DOUBLE(NAME, MEMBER)                                        \
  Field {                                                                   \
    NAME, [](RunConfig &c, const std::string &v) { c.MEMBER = ToDouble(NAME, v); }, \
        [](const RunConfig &c) { return FromDouble(c.MEMBER); }             \
  }
#define PROSODY_UINT(NAME, MEMBER)                                          \
  Field {                                                                   \
    NAME,                                                                   \
        [](RunConfig &c, const std::string &v) {                            \
          c.MEMBER = static_cast<decltype(c.MEMBER)>(ToUint(NAME, v));      \
        },                                                                  \
        [](const RunConfig &c) { return std::to_string(c.MEMBER); }         \
  }
#define PROSODY_STRING(NAME, MEMBER)                                        \
  Field {                                                                   \
    NAME, [](RunConfig &c, const std::string &v) { c.MEMBER = v; },         \
        [](const RunConfig &c) { return c.MEMBER; }                         \
  }

const std::vector<Field> &Schema() {
  static const std::vector<Field> fields = {
      PROSODY_UINT("run.seed", seed),
      PROSODY_UINT("run.workers", workers),
      PROSODY_STRING("paths.corpus", corpus),
      PROSODY_STRING("paths.rules", rules),
      PROSODY_STRING("paths.pool", pool),
      PROSODY_STRING("paths.out", out),
      PROSODY_DOUBLE("corpus.frame_period", frame_period),
      PROSODY_DOUBLE("corpus.window", window),
      PROSODY_DOUBLE("corpus.stride", stride),
      PROSODY_STRING("corpus.merge", merge),
      PROSODY_DOUBLE("corpus.train_ratio", ratios.train),
      PROSODY_DOUBLE("corpus.dev_ratio", ratios.dev),
      PROSODY_DOUBLE("corpus.test_ratio", ratios.test),
      PROSODY_UINT("synth.n_utterances", synth.n_utterances),
      PROSODY_UINT("synth.n_unlabeled", n_unlabeled),
      PROSODY_STRING("synth.vocab", synth.vocab),
      PROSODY_UINT("synth.lexicon_size", synth.lexicon_size),
      PROSODY_UINT("synth.min_words", synth.min_words),
      PROSODY_UINT("synth.max_words", synth.max_words),
      PROSODY_DOUBLE("synth.accent_rate", synth.accent_rate),
      PROSODY_DOUBLE("synth.noise_level", synth.noise_level),
      PROSODY_DOUBLE("synth.accent_boost", synth.accent_boost),
      PROSODY_UINT("synth.frames_per_token", synth.frames_per_token),
      PROSODY_UINT("synth.pause_frames", synth.pause_frames),
      PROSODY_UINT("synth.feature_dim", synth.feature_dim),
      PROSODY_UINT("synth.accent_dim", synth.accent_dim),
      PROSODY_UINT("synth.n_stories", synth.n_stories),
      PROSODY_UINT("model.hidden_dim", dims.hidden_dim),
      PROSODY_DOUBLE("model.lambda", train.lambda),
      PROSODY_UINT("model.steps", train.steps),
      PROSODY_DOUBLE("model.freeze_fraction", train.freeze_fraction),
      PROSODY_DOUBLE("model.learning_rate", train.learning_rate),
      PROSODY_UINT("model.batch_size", train.batch_size),
      PROSODY_DOUBLE("model.clip_norm", train.clip_norm),
      Field{"model.prosody_loss",
            [](RunConfig &c, const std::string &v) {
              if (v == "mse")
                c.train.prosody_loss = ProsodyLossKind::kMse;
              else if (v == "bce")
                c.train.prosody_loss = ProsodyLossKind::kBce;
              else
                throw ConfigError("model.prosody_loss: expected mse or bce");
            },
            [](const RunConfig &c) {
              return std::string(c.train.prosody_loss == ProsodyLossKind::kMse
                                     ? "mse"
                                     : "bce");
            }},
      PROSODY_STRING("decode.split", decode_split),
      PROSODY_UINT("decode.beam_width", beam.width),
      PROSODY_DOUBLE("decode.lm_weight", beam.lm_weight),
      PROSODY_DOUBLE("decode.bonus", beam.bonus),
      PROSODY_UINT("decode.lm_order", lm_order),
      Field{"decode.use_lm",
            [](RunConfig &c, const std::string &v) {
              c.use_lm = ToBool("decode.use_lm", v);
            },
            [](const RunConfig &c) {
              return std::string(c.use_lm ? "true" : "false");
            }},
      Field{"score.tolerances",
            [](RunConfig &c, const std::string &v) {
              std::vector<double> tols;
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ','))
                tols.push_back(ToDouble("score.tolerances", Trim(item)));
              c.scoring.tolerances_ms = tols;
            },
            [](const RunConfig &c) {
              std::string s;
              for (double t : c.scoring.tolerances_ms)
                s += (s.empty() ? "" : ",") + FromDouble(t);
              return s;
            }},
      Field{"score.match_on",
            [](RunConfig &c, const std::string &v) {
              if (v == "center")
                c.scoring.match_on = MatchAnchor::kCenter;
              else if (v == "onset")
                c.scoring.match_on = MatchAnchor::kOnset;
              else
                throw ConfigError("score.match_on: expected center or onset");
            },
            [](const RunConfig &c) {
              return std::string(
                  c.scoring.match_on == MatchAnchor::kCenter ? "center" : "onset");
            }},
      PROSODY_STRING("score.ref_events", ref_events),
      PROSODY_STRING("score.hyp_events", hyp_events),
      PROSODY_STRING("score.ref_text", ref_text),
      PROSODY_STRING("score.hyp_text", hyp_text),
      PROSODY_DOUBLE("selftrain.epsilon", st_epsilon),
      PROSODY_UINT("selftrain.max_iters", st_max_iters),
      PROSODY_DOUBLE("selftrain.label_noise", st_label_noise),
      PROSODY_UINT("selftrain.steps", st_steps),
  };
  return fields;
}

#undef PROSODY_DOUBLE
#undef PROSODY_UINT
#undef PROSODY_STRING

}  // namespace

RunConfig RunConfig::Parse(std::istream &in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  const auto &schema = Schema();
  for (const auto &[section, body] : tree) {
    if (body.empty())
      throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto &[key, value] : body) {
      const std::string name = section + "." + key;
      auto it = std::find_if(schema.begin(), schema.end(),
                             [&](const Field &f) { return f.name == name; });
      if (it == schema.end()) throw ConfigError("config: unknown key '" + name + "'");
      it->set(cfg, Trim(value.get_value<std::string>()));
    }
  }
  return cfg;
}

RunConfig RunConfig::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return Parse(in);
}

void RunConfig::Validate() const {
  namespace fs = std::filesystem;
  auto fail = [](const std::string &msg) { throw ConfigError("config: " + msg); };
  if (workers == 0) fail("run.workers must be >= 1");
  if (!corpus.empty() && !fs::exists(corpus)) fail("paths.corpus not found: " + corpus);
  if (!rules.empty() && !fs::exists(rules)) fail("paths.rules not found: " + rules);
  if (!pool.empty() && !fs::exists(pool)) fail("paths.pool not found: " + pool);
  if (out.empty()) fail("paths.out is empty");
  if (!(frame_period > 0)) fail("corpus.frame_period must be positive");
  if (!(stride > 0) || !(window >= stride)) fail("corpus: need 0 < stride <= window");
  if (merge != "mean") fail("corpus.merge: only 'mean' is supported");
  if (ratios.train < 0 || ratios.dev < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    fail("corpus ratios must be non-negative and sum to 1");
  try {
    SynthConfig s = synth;
    s.frame_period = frame_period;
    s.Validate();
    TrainConfig t = train;
    t.Validate();
    scoring.Validate();
    ModelDims d = dims;
    d.Validate();
  } catch (const std::invalid_argument &e) {
    fail(e.what());
  }
  if (decode_split != "train" && decode_split != "dev" && decode_split != "test")
    fail("decode.split must be train, dev or test");
  if (beam.width == 0) fail("decode.beam_width must be >= 1");
  if (lm_order == 0) fail("decode.lm_order must be >= 1");
  if (!(st_label_noise >= 0 && st_label_noise <= 1))
    fail("selftrain.label_noise must be in [0,1]");
  if (st_epsilon < 0) fail("selftrain.epsilon must be >= 0");
  if (st_steps == 0) fail("selftrain.steps must be >= 1");
}

std::string RunConfig::Canonical() const {
  std::vector<std::string> lines;
  for (const auto &f : Schema()) lines.push_back(f.name + "=" + f.get(*this));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto &l : lines) out += l + "\n";
  return out;
}

std::string RunConfig::Hash() const {
  std::string text;
  std::istringstream lines(Canonical());
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("paths.out=", 0) != 0 && line.rfind("run.workers=", 0) != 0)
      text += line + "\n";
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t RunConfig::SubSeed(std::uint64_t stream) const {
  // splitmix64 of (seed, stream)
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace prosody
