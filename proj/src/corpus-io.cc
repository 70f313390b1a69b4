// corpus-io.cc

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

#include "prosody/corpus-io.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace prosody {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream OpenIn(const std::string &path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream OpenOut(const std::string &path, bool binary = false) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  std::size_t b = 0;
  while (true) {
    std::size_t e = line.find('\t', b);
    fields.push_back(line.substr(b, e == std::string::npos ? e : e - b));
    if (e == std::string::npos) break;
    b = e + 1;
  }
  return fields;
}

std::string StripCr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double ParseDouble(const std::string &s, const std::string &where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw std::runtime_error(where + ": bad number '" + s + "'");
  }
}

}  // namespace

std::vector<float> ReadFeatureSidecar(const std::string &path,
                                      std::size_t rows, std::size_t cols) {
  auto in = OpenIn(path, true);
  std::vector<float> values(rows * cols);
  std::vector<char> bytes(values.size() * 4);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error(path + ": expected " + std::to_string(rows) +
                             "x" + std::to_string(cols) + " float32 values");
  if (in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error(path + ": trailing bytes after feature matrix");
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t w;
    std::memcpy(&w, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big)
      w = __builtin_bswap32(w);
    values[i] = std::bit_cast<float>(w);
  }
  return values;
}

void WriteFeatureSidecar(const std::string &path,
                         const std::vector<float> &values) {
  auto out = OpenOut(path, true);
  for (float v : values) {
    std::uint32_t w = std::bit_cast<std::uint32_t>(v);
    if constexpr (std::endian::native == std::endian::big)
      w = __builtin_bswap32(w);
    out.write(reinterpret_cast<const char *>(&w), 4);
  }
}

void WriteCorpus(const std::string &path, const std::vector<Utterance> &corpus,
                 const std::string &features_dir) {
  const fs::path base = fs::path(path).parent_path();
  auto out = OpenOut(path);
  for (const auto &u : corpus) {
    json rec;
    rec["id"] = u.id;
    rec["story_id"] = u.story_id;
    rec["duration"] = u.duration;
    rec["transcript"] = u.transcript_raw;
    json words = json::array();
    for (const auto &w : u.words) words.push_back({w.token, w.start, w.end});
    rec["words"] = words;
    json accents = json::array();
    for (const auto &e : u.accents.events()) accents.push_back({e.start, e.end});
    rec["accents"] = accents;
    rec["frame_period"] = u.frame_period;
    if (u.feature_dim > 0) {
      std::string rel = (fs::path(features_dir) / (u.id + ".f32")).string();
      WriteFeatureSidecar((base / rel).string(), u.features);
      rec["features_path"] = rel;
      rec["n_frames"] = u.num_frames();
      rec["feature_dim"] = u.feature_dim;
    }
    out << rec.dump() << '\n';
  }
}

std::vector<Utterance> ReadCorpus(const std::string &path,
                                  const NormalizationRules &rules) {
  auto in = OpenIn(path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<Utterance> corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    try {
      json rec = json::parse(line);
      Utterance u;
      u.id = rec.at("id").get<std::string>();
      u.story_id = rec.value("story_id", u.id);
      u.duration = rec.at("duration").get<double>();
      u.frame_period = rec.value("frame_period", kDefaultFramePeriod);
      u.transcript_raw = rec.value("transcript", std::string());
      u.transcript_norm = NormalizeTranscript(u.transcript_raw, rules);
      for (const auto &w : rec.value("words", json::array()))
        u.words.push_back({w.at(0).get<std::string>(), w.at(1).get<double>(),
                           w.at(2).get<double>()});
      std::vector<AccentEvent> events;
      for (const auto &e : rec.value("accents", json::array())) {
        if (e.is_number()) {
          events.push_back(EventSet::FromPoint(e.get<double>(), u.frame_period));
        } else {
          double s = e.at(0).get<double>(), t = e.at(1).get<double>();
          events.push_back(s == t ? EventSet::FromPoint(s, u.frame_period)
                                  : AccentEvent{s, t});
        }
      }
      for (auto &e : events) {
        e.start = std::max(0.0, e.start);
        e.end = std::min(u.duration, e.end);
      }
      u.accents = EventSet(std::move(events));
      if (rec.contains("features_path")) {
        const std::size_t rows = rec.at("n_frames").get<std::size_t>();
        const std::size_t cols = rec.at("feature_dim").get<std::size_t>();
        fs::path fp = rec.at("features_path").get<std::string>();
        if (fp.is_relative()) fp = base / fp;
        u.features = ReadFeatureSidecar(fp.string(), rows, cols);
        u.feature_dim = cols;
      }
      u.Validate();
      corpus.push_back(std::move(u));
    } catch (const json::exception &e) {
      throw std::runtime_error(where + ": " + e.what());
    } catch (const std::invalid_argument &e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  return corpus;
}

void WriteEventTsv(const std::string &path, const EventTable &events) {
  auto out = OpenOut(path);
  out.precision(17);
  for (const auto &[id, set] : events) {
    if (set.empty()) out << id << '\n';
    for (const auto &e : set.events())
      out << id << '\t' << e.start << '\t' << e.end << '\n';
  }
}

EventTable ReadEventTsv(const std::string &path) {
  auto in = OpenIn(path);
  std::map<std::string, std::vector<AccentEvent>> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = StripCr(line);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);
    auto f = SplitTabs(line);
    if (f.size() == 1) {
      raw[f[0]];
      continue;
    }
    if (f.size() != 3)
      throw std::runtime_error(where + ": expected utterance_id, start_s, end_s");
    raw[f[0]].push_back({ParseDouble(f[1], where), ParseDouble(f[2], where)});
  }
  EventTable table;
  for (auto &[id, v] : raw) table.emplace(id, EventSet(std::move(v)));
  return table;
}

void WriteTextTsv(const std::string &path, const TextTable &texts) {
  auto out = OpenOut(path);
  for (const auto &[id, text] : texts) out << id << '\t' << text << '\n';
}

TextTable ReadTextTsv(const std::string &path) {
  auto in = OpenIn(path);
  TextTable table;
  std::string line;
  while (std::getline(in, line)) {
    line = StripCr(line);
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      table[line] = "";
    else
      table[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

void WriteFrameLabelTsv(const std::string &path,
                        const FrameLabelTable &labels) {
  auto out = OpenOut(path);
  out.precision(17);
  for (const auto &[id, track] : labels) {
    out << id << '\t' << track.frame_period << '\t';
    for (double v : track.values) out << (v >= 0.5 ? '1' : '0');
    out << '\n';
  }
}

FrameLabelTable ReadFrameLabelTsv(const std::string &path) {
  auto in = OpenIn(path);
  FrameLabelTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = StripCr(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    auto f = SplitTabs(line);
    if (f.size() != 3)
      throw std::runtime_error(where + ": expected id, frame_period, labels");
    FrameTrack t;
    t.frame_period = ParseDouble(f[1], where);
    for (char c : f[2]) {
      if (c != '0' && c != '1')
        throw std::runtime_error(where + ": labels must be 0/1");
      t.values.push_back(c == '1' ? 1.0 : 0.0);
    }
    table[f[0]] = std::move(t);
  }
  return table;
}

}  // namespace prosody
