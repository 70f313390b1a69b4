// commands.cc

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

#include "prosody/commands.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "prosody/corpus-io.h"
#include "prosody/ctc.h"
#include "prosody/metrics.h"
#include "prosody/model.h"
#include "prosody/ngram.h"
#include "prosody/selftrain.h"
#include "prosody/synth.h"
#include "prosody/train.h"

namespace prosody {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Sub-seed streams; each consumer of randomness gets its own.
enum SeedStream : std::uint64_t {
  kStreamCorpus = 1,
  kStreamPool = 2,
  kStreamSplit = 3,
  kStreamInit = 4,
  kStreamTrain = 5,
  kStreamNoise = 6,
  kStreamSelfTrain = 7,
};

std::string OutPath(const RunConfig &cfg, const std::string &name) {
  return (fs::path(cfg.out) / name).string();
}

void RequireFile(const std::string &path) {
  if (!fs::is_regular_file(path))
    throw std::runtime_error("missing input file: " + path);
}

void WriteJson(const std::string &path, const json &j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

json ReadJson(const std::string &path) {
  RequireFile(path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

NormalizationRules LoadRules(const RunConfig &cfg) {
  if (cfg.rules.empty()) return NormalizationRules::Default();
  try {
    return NormalizationRules::Load(cfg.rules);
  } catch (const std::invalid_argument &e) {
    throw ConfigError(cfg.rules + ": " + e.what());
  }
}

json ErrorRateJson(const ErrorRateReport &r) {
  return {{"rate", r.rate},
          {"S", r.substitutions},
          {"I", r.insertions},
          {"D", r.deletions},
          {"N", r.ref_length}};
}

/// Runs fn(i) for i in [0, n) on `workers` threads. Each index writes only
/// its own result slot; the first failure by index is rethrown.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto &t : pool) t.join();
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

/// Output of `prepare`, read back by the later commands.
struct Prepared {
  NormalizationRules rules;
  std::vector<Utterance> corpus;
  CorpusSplit split;
  std::map<std::string, const Utterance *> by_id;

  std::vector<const Utterance *> Subset(const std::vector<std::string> &ids) const {
    std::vector<const Utterance *> out;
    for (const auto &id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw std::runtime_error("splits.json names unknown utterance " + id);
      out.push_back(it->second);
    }
    return out;
  }
  std::vector<const Utterance *> Named(const std::string &name) const {
    if (name == "train") return Subset(split.train);
    if (name == "dev") return Subset(split.dev);
    if (name == "test") return Subset(split.test);
    throw ConfigError("unknown split " + name);
  }
};

Prepared LoadPrepared(const RunConfig &cfg) {
  Prepared p;
  p.rules = LoadRules(cfg);
  const std::string corpus_path = OutPath(cfg, "corpus.jsonl");
  RequireFile(corpus_path);
  p.corpus = ReadCorpus(corpus_path, p.rules);
  for (const auto &u : p.corpus) p.by_id[u.id] = &u;
  const json s = ReadJson(OutPath(cfg, "splits.json"));
  try {
    p.split.train = s.at("train").get<std::vector<std::string>>();
    p.split.dev = s.at("dev").get<std::vector<std::string>>();
    p.split.test = s.at("test").get<std::vector<std::string>>();
  } catch (const json::exception &e) {
    throw std::runtime_error(OutPath(cfg, "splits.json") + ": " + e.what());
  }
  return p;
}

/// Clips of every utterance, in corpus order.
std::vector<Utterance> ClipAll(const std::vector<const Utterance *> &utts,
                               const RunConfig &cfg,
                               const NormalizationRules &rules) {
  std::vector<Utterance> out;
  for (const auto *u : utts)
    for (const auto &c : SplitIntoClips(u->duration, cfg.window, cfg.stride, u->id))
      out.push_back(CutClip(*u, c, rules));
  return out;
}

std::string VocabularyChars(const std::vector<const Utterance *> &utts) {
  std::set<char> chars;
  for (const auto *u : utts) chars.insert(u->transcript_norm.begin(), u->transcript_norm.end());
  return std::string(chars.begin(), chars.end());
}

std::vector<const Utterance *> Pointers(const std::vector<Utterance> &v) {
  std::vector<const Utterance *> out;
  for (const auto &u : v) out.push_back(&u);
  return out;
}

ModelDims DimsFor(const RunConfig &cfg, std::size_t feature_dim,
                  const Vocabulary &vocab) {
  ModelDims d = cfg.dims;
  d.input_dim = feature_dim;
  d.vocab_size = vocab.size();
  d.Validate();
  return d;
}

bool Feasible(const Utterance &u, const Vocabulary &vocab) {
  try {
    MakeExample(u, vocab);
    return true;
  } catch (const std::invalid_argument &) {
    return false;
  }
}

std::string CollapseSpaces(const std::string &s) {
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) out += (out.empty() ? "" : " ") + word;
  return out;
}

void CmdPrepare(const RunConfig &cfg, std::ostream &log) {
  fs::create_directories(cfg.out);
  const NormalizationRules rules = LoadRules(cfg);
  std::vector<Utterance> corpus, pool;
  SynthConfig synth = cfg.synth;
  synth.frame_period = cfg.frame_period;
  if (cfg.corpus.empty()) {
    synth.seed = cfg.SubSeed(kStreamCorpus);
    corpus = SynthCorpus(synth);
    if (cfg.pool.empty() && cfg.n_unlabeled > 0) {
      SynthConfig p = synth;
      p.n_utterances = cfg.n_unlabeled;
      p.id_prefix = "pool";
      p.seed = cfg.SubSeed(kStreamPool);
      pool = SynthCorpus(p);
    }
  } else {
    corpus = ReadCorpus(cfg.corpus, rules);
  }
  if (!cfg.pool.empty()) pool = ReadCorpus(cfg.pool, rules);
  std::set<std::string> ids;
  for (const auto &u : corpus) ids.insert(u.id);
  for (const auto &u : pool)
    if (ids.count(u.id))
      throw std::runtime_error("utterance " + u.id + " is in both corpus and pool");

  const CorpusSplit split = MakeSplits(corpus, cfg.ratios, cfg.SubSeed(kStreamSplit));
  WriteCorpus(OutPath(cfg, "corpus.jsonl"), corpus, "features");
  WriteCorpus(OutPath(cfg, "pool.jsonl"), pool, "pool_features");

  EventTable events;
  TextTable texts;
  FrameLabelTable labels;
  std::set<std::string> stories;
  std::size_t n_clips = 0;
  std::ofstream clips(OutPath(cfg, "clips.tsv"));
  if (!clips) throw std::runtime_error("cannot write " + OutPath(cfg, "clips.tsv"));
  for (const auto &u : corpus) {
    events[u.id] = u.accents;
    texts[u.id] = u.transcript_norm;
    labels[u.id] = EventsToFrames(u.accents, u.duration, u.frame_period);
    stories.insert(u.story_id);
    for (const auto &c : SplitIntoClips(u.duration, cfg.window, cfg.stride, u.id)) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "\t%.6f\t%.6f\n", c.start, c.end);
      clips << u.id << buf;
      ++n_clips;
    }
  }
  WriteEventTsv(OutPath(cfg, "ref_events.tsv"), events);
  WriteTextTsv(OutPath(cfg, "ref_text.tsv"), texts);
  WriteFrameLabelTsv(OutPath(cfg, "labels.tsv"), labels);
  WriteJson(OutPath(cfg, "splits.json"),
            {{"train", split.train}, {"dev", split.dev}, {"test", split.test}});

  json report = {{"command", "prepare"},
                 {"config_hash", cfg.Hash()},
                 {"source", cfg.corpus.empty() ? "synthetic" : cfg.corpus},
                 {"n_utterances", corpus.size()},
                 {"n_pool", pool.size()},
                 {"n_stories", stories.size()},
                 {"n_clips", n_clips},
                 {"splits",
                  {{"train", split.train.size()},
                   {"dev", split.dev.size()},
                   {"test", split.test.size()}}}};
  WriteJson(OutPath(cfg, "prepare.json"), report);
  log << "prepare: " << corpus.size() << " utterances (" << split.train.size()
      << "/" << split.dev.size() << "/" << split.test.size() << "), pool "
      << pool.size() << "\n";
}

void CmdTrain(const RunConfig &cfg, std::ostream &log) {
  const Prepared p = LoadPrepared(cfg);
  const auto train_utts = p.Named("train");
  if (train_utts.empty()) throw std::runtime_error("empty training split");
  const std::vector<Utterance> clips = ClipAll(train_utts, cfg, p.rules);
  std::vector<const Utterance *> all = train_utts;
  for (const auto &c : clips) all.push_back(&c);
  const Vocabulary vocab(VocabularyChars(all));

  std::vector<TrainExample> examples;
  std::size_t skipped = 0;
  for (const auto &c : clips) {
    try {
      examples.push_back(MakeExample(c, vocab));
    } catch (const std::invalid_argument &) {
      ++skipped;
    }
  }
  if (examples.empty()) throw std::runtime_error("no trainable clips in the training split");
  const ModelDims dims = DimsFor(cfg, train_utts.front()->feature_dim, vocab);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.SubSeed(kStreamTrain);
  log << "train: " << examples.size() << " clips, " << tc.steps << " steps\n";
  TrainResult result =
      Train(JointModel::Random(dims, cfg.SubSeed(kStreamInit)), examples, tc);

  SaveCheckpoint(OutPath(cfg, "model.ckpt"), result.model, cfg.Hash());
  WriteTrainLog(OutPath(cfg, "train_log.csv"), result.history);

  // Mean over the last steps, a steadier summary than the final batch.
  const std::size_t tail = std::min<std::size_t>(50, result.history.size());
  double l_asr = 0, l_pad = 0, l_j = 0;
  for (std::size_t i = result.history.size() - tail; i < result.history.size(); ++i) {
    l_asr += result.history[i].l_asr / tail;
    l_pad += result.history[i].l_pad / tail;
    l_j += result.history[i].l_j / tail;
  }
  json report = {
      {"command", "train"},
      {"config_hash", cfg.Hash()},
      {"vocab", vocab.chars()},
      {"dims",
       {{"input_dim", dims.input_dim},
        {"hidden_dim", dims.hidden_dim},
        {"vocab_size", dims.vocab_size}}},
      {"lambda", tc.lambda},
      {"steps", tc.steps},
      {"freeze_steps", tc.FreezeSteps()},
      {"n_train_utterances", train_utts.size()},
      {"n_examples", examples.size()},
      {"n_skipped", skipped},
      {"final_loss", {{"l_asr", l_asr}, {"l_pad", l_pad}, {"l_j", l_j}}}};
  WriteJson(OutPath(cfg, "train.json"), report);
}

void CmdDecode(const RunConfig &cfg, std::ostream &log) {
  const Prepared p = LoadPrepared(cfg);
  const json trained = ReadJson(OutPath(cfg, "train.json"));
  const std::string ckpt = OutPath(cfg, "model.ckpt");
  RequireFile(ckpt);
  const JointModel model = LoadCheckpoint(ckpt);
  const Vocabulary vocab(trained.at("vocab").get<std::string>());
  if (model.dims().vocab_size != vocab.size())
    throw std::runtime_error(ckpt + ": vocabulary size does not match train.json");

  const auto utts = p.Named(cfg.decode_split);
  if (utts.empty()) throw std::runtime_error("split " + cfg.decode_split + " is empty");

  NGramLm lm;
  std::unique_ptr<CharLmScorer> scorer;
  if (cfg.use_lm) {
    std::vector<std::string> texts;
    for (const auto *u : p.Named("train")) {
      std::string t;
      for (char c : u->transcript_norm)
        if (vocab.Contains(c)) t += c;
      texts.push_back(t);
    }
    lm = TrainNGram(texts, cfg.lm_order, vocab.chars());
    lm.Save(OutPath(cfg, "lm.json"));
    scorer = std::make_unique<CharLmScorer>(lm, vocab);
  }

  std::vector<std::string> hyp_text(utts.size());
  std::vector<EventSet> hyp_events(utts.size());
  std::atomic<std::size_t> n_clipped{0};
  ParallelFor(utts.size(), cfg.workers, [&](std::size_t i) {
    const Utterance &u = *utts[i];
    const ModelOutput out = model.Forward(u.features, u.num_frames(), u.frame_period);
    hyp_text[i] = CollapseSpaces(vocab.Decode(BeamDecode(out.asr, cfg.beam, scorer.get())));
    FrameTrack scores = out.prosody;
    const auto windows = SplitIntoClips(u.duration, cfg.window, cfg.stride, u.id);
    if (windows.size() > 1) {
      std::vector<std::pair<ClipWindow, FrameTrack>> parts;
      for (const auto &w : windows) {
        const Utterance c = CutClip(u, w, p.rules);
        parts.emplace_back(w, model.Forward(c.features, c.num_frames(), c.frame_period).prosody);
      }
      scores = MergeClipScores(parts);
      ++n_clipped;
    }
    hyp_events[i] = FramesToEvents(scores, 0.5);
  });

  TextTable texts;
  EventTable events;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    texts[utts[i]->id] = hyp_text[i];
    events[utts[i]->id] = hyp_events[i];
  }
  WriteTextTsv(OutPath(cfg, "hyp_text.tsv"), texts);
  WriteEventTsv(OutPath(cfg, "hyp_events.tsv"), events);
  json report = {{"command", "decode"},
                 {"config_hash", cfg.Hash()},
                 {"split", cfg.decode_split},
                 {"n_utterances", utts.size()},
                 {"n_clipped", n_clipped.load()},
                 {"use_lm", cfg.use_lm},
                 {"lm_order", cfg.use_lm ? json(cfg.lm_order) : json(nullptr)},
                 {"beam",
                  {{"width", cfg.beam.width},
                   {"lm_weight", cfg.beam.lm_weight},
                   {"bonus", cfg.beam.bonus}}}};
  WriteJson(OutPath(cfg, "decode.json"), report);
  log << "decode: " << utts.size() << " utterances from " << cfg.decode_split << "\n";
}

void CmdScore(const RunConfig &cfg, std::ostream &log) {
  fs::create_directories(cfg.out);
  const std::string ref_path =
      cfg.ref_events.empty() ? OutPath(cfg, "ref_events.tsv") : cfg.ref_events;
  const std::string hyp_path =
      cfg.hyp_events.empty() ? OutPath(cfg, "hyp_events.tsv") : cfg.hyp_events;
  RequireFile(ref_path);
  RequireFile(hyp_path);
  const EventTable ref = ReadEventTsv(ref_path);
  const EventTable hyp = ReadEventTsv(hyp_path);
  if (hyp.empty()) throw std::runtime_error(hyp_path + ": no hypotheses");

  // Scored over the utterances of the hypothesis file.
  std::vector<std::pair<EventSet, EventSet>> pairs;
  for (const auto &[id, set] : hyp) {
    auto it = ref.find(id);
    if (it == ref.end())
      throw std::runtime_error(hyp_path + ": utterance " + id + " not in " + ref_path);
    pairs.emplace_back(it->second, set);
  }
  const auto rows = ToleranceSweep(pairs, cfg.scoring);

  json tol = json::array();
  std::ofstream tsv(OutPath(cfg, "score.tsv"));
  if (!tsv) throw std::runtime_error("cannot write " + OutPath(cfg, "score.tsv"));
  tsv << "tolerance_ms\tprecision\trecall\tf1\ttp\tfp\tfn\n";
  tsv.precision(6);
  tsv << std::fixed;
  for (const auto &r : rows) {
    tol.push_back({{"tolerance_ms", r.tolerance_ms},
                   {"precision", r.precision},
                   {"recall", r.recall},
                   {"f1", r.f1},
                   {"tp", r.tp},
                   {"fp", r.fp},
                   {"fn", r.fn}});
    tsv << r.tolerance_ms << '\t' << r.precision << '\t' << r.recall << '\t'
        << r.f1 << '\t' << r.tp << '\t' << r.fp << '\t' << r.fn << '\n';
  }

  json asr = nullptr;
  const bool explicit_text = !cfg.ref_text.empty() || !cfg.hyp_text.empty();
  const std::string ref_text_path =
      cfg.ref_text.empty() ? OutPath(cfg, "ref_text.tsv") : cfg.ref_text;
  const std::string hyp_text_path =
      cfg.hyp_text.empty() ? OutPath(cfg, "hyp_text.tsv") : cfg.hyp_text;
  if (explicit_text || (fs::exists(ref_text_path) && fs::exists(hyp_text_path))) {
    RequireFile(ref_text_path);
    RequireFile(hyp_text_path);
    const TextTable ref_text = ReadTextTsv(ref_text_path);
    const TextTable hyp_text = ReadTextTsv(hyp_text_path);
    std::vector<ErrorRateReport> wer, cer;
    for (const auto &[id, text] : hyp_text) {
      auto it = ref_text.find(id);
      if (it == ref_text.end())
        throw std::runtime_error(hyp_text_path + ": utterance " + id + " not in " +
                                 ref_text_path);
      wer.push_back(Wer(it->second, text));
      cer.push_back(Cer(it->second, text));
    }
    const ErrorRateReport w = Accumulate(wer), c = Accumulate(cer);
    asr = {{"n_utterances", hyp_text.size()},
           {"wer", ErrorRateJson(w)},
           {"cer", ErrorRateJson(c)}};
    std::ofstream atsv(OutPath(cfg, "score_asr.tsv"));
    if (!atsv) throw std::runtime_error("cannot write " + OutPath(cfg, "score_asr.tsv"));
    atsv << "metric\trate\tS\tI\tD\tN\n" << std::fixed;
    atsv.precision(6);
    for (const auto &[name, r] : {std::pair{"wer", w}, std::pair{"cer", c}})
      atsv << name << '\t' << r.rate << '\t' << r.substitutions << '\t'
           << r.insertions << '\t' << r.deletions << '\t' << r.ref_length << '\n';
  }
  json report = {{"command", "score"},
                 {"config_hash", cfg.Hash()},
                 {"match_on",
                  cfg.scoring.match_on == MatchAnchor::kCenter ? "center" : "onset"},
                 {"n_utterances", pairs.size()},
                 {"events", tol},
                 {"asr", asr}};
  WriteJson(OutPath(cfg, "score.json"), report);
  for (const auto &r : rows)
    log << "score: F1@" << r.tolerance_ms << "ms = " << r.f1 << "\n";
}

void CmdSelfTrain(const RunConfig &cfg, std::ostream &log) {
  const Prepared p = LoadPrepared(cfg);
  const std::string pool_path = OutPath(cfg, "pool.jsonl");
  RequireFile(pool_path);
  const std::vector<Utterance> pool_utts = ReadCorpus(pool_path, p.rules);
  if (pool_utts.empty()) throw std::runtime_error(pool_path + ": unlabeled pool is empty");

  const auto train_utts = p.Named("train");
  const auto dev_utts = p.Named("dev");
  if (dev_utts.empty()) throw std::runtime_error("self-training needs a dev split");
  const std::vector<Utterance> labeled_clips = ClipAll(train_utts, cfg, p.rules);
  const std::vector<Utterance> pool_clips = ClipAll(Pointers(pool_utts), cfg, p.rules);
  std::vector<const Utterance *> all = Pointers(labeled_clips);
  for (const auto &c : pool_clips) all.push_back(&c);
  const Vocabulary vocab(VocabularyChars(all));
  const ModelDims dims = DimsFor(cfg, train_utts.front()->feature_dim, vocab);

  std::vector<LabeledUtterance> labeled;
  for (const auto &c : labeled_clips)
    if (Feasible(c, vocab))
      labeled.push_back({&c, EventsToFrames(c.accents, c.duration, c.frame_period)});
  // Initial pseudo-labels: pool annotations with a fraction of frames flipped.
  std::mt19937_64 rng(cfg.SubSeed(kStreamNoise));
  std::bernoulli_distribution flip(cfg.st_label_noise);
  std::vector<const Utterance *> unlabeled;
  std::map<std::string, FrameTrack> initial;
  std::size_t frames = 0, flipped = 0;
  for (const auto &c : pool_clips) {
    if (!Feasible(c, vocab)) continue;
    unlabeled.push_back(&c);
    FrameTrack t = EventsToFrames(c.accents, c.duration, c.frame_period);
    for (auto &v : t.values) {
      ++frames;
      if (flip(rng)) {
        v = 1.0 - v;
        ++flipped;
      }
    }
    initial[c.id] = std::move(t);
  }
  if (labeled.empty() || unlabeled.empty())
    throw std::runtime_error("self-training: no trainable labeled or pool clips");

  TrainConfig tc = cfg.train;
  tc.steps = cfg.st_steps;
  SelfTrainOptions opts;
  opts.max_iters = cfg.st_max_iters;
  opts.epsilon = cfg.st_epsilon;
  opts.seed = cfg.SubSeed(kStreamSelfTrain);
  opts.parallel_folds = cfg.workers > 1;
  const Trainer trainer = MakeJointTrainer(vocab, dims, tc);
  const DevScorer scorer = MakeDevScorer(dev_utts, 100.0, 0.5);

  log << "selftrain: " << labeled.size() << " labeled, " << unlabeled.size()
      << " pool clips\n";
  SelfTrainState state = InitSelfTrain(labeled, unlabeled, initial, trainer, scorer, opts);
  log << "selftrain: iteration 0 dev F1 " << state.best_dev_f1 << "\n";
  while (!state.halted) {
    state = SelfTrainIterate(std::move(state), labeled, unlabeled, trainer, scorer);
    const auto &r = state.history.back();
    log << "selftrain: iteration " << r.iteration << " dev F1 " << r.dev_f1
        << (r.accepted ? " (accepted)" : " (rejected)") << "\n";
  }
  WriteSelfTrainCheckpoint(OutPath(cfg, "selftrain"), state);

  json hist = json::array();
  for (const auto &r : state.history)
    hist.push_back({{"iteration", r.iteration},
                    {"dev_f1", r.dev_f1},
                    {"gain", r.gain},
                    {"accepted", r.accepted}});
  json report = {{"command", "selftrain"},
                 {"config_hash", cfg.Hash()},
                 {"n_labeled", labeled.size()},
                 {"n_pool", unlabeled.size()},
                 {"label_noise", cfg.st_label_noise},
                 {"flipped_fraction",
                  frames ? static_cast<double>(flipped) / frames : 0.0},
                 {"dev_f1_iter0", state.history.front().dev_f1},
                 {"dev_f1_at_halt", state.best_dev_f1},
                 {"iterations", state.iteration},
                 {"halted", state.halted},
                 {"diagnostic", state.diagnostic},
                 {"history", hist}};
  WriteJson(OutPath(cfg, "selftrain.json"), report);
}

void Flatten(const json &j, const std::string &prefix,
             std::vector<std::pair<std::string, std::string>> *rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      Flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      Flatten(j[i], prefix + "." + std::to_string(i), rows);
  } else {
    rows->emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

void CmdReport(const RunConfig &cfg, std::ostream &log) {
  json report = {{"command", "report"}, {"config_hash", cfg.Hash()}};
  std::size_t found = 0;
  for (const char *name : {"prepare", "train", "decode", "score", "selftrain"}) {
    const std::string path = OutPath(cfg, std::string(name) + ".json");
    if (!fs::exists(path)) continue;
    json j = ReadJson(path);
    j.erase("command");
    report[name] = std::move(j);
    ++found;
  }
  if (found == 0) throw std::runtime_error("nothing to report in " + cfg.out);
  std::vector<std::pair<std::string, std::string>> rows;
  Flatten(report, "", &rows);
  std::ofstream tsv(OutPath(cfg, "report.tsv"));
  if (!tsv) throw std::runtime_error("cannot write " + OutPath(cfg, "report.tsv"));
  tsv << "key\tvalue\n";
  for (const auto &[k, v] : rows) tsv << k << '\t' << v << '\n';
  WriteJson(OutPath(cfg, "report.json"), report);
  log << "report: " << found << " stage reports in " << cfg.out << "\n";
}

}  // namespace

const std::vector<std::string> &CommandNames() {
  static const std::vector<std::string> names = {"prepare", "train", "decode",
                                                 "score", "selftrain", "report"};
  return names;
}

bool IsCommand(const std::string &name) {
  const auto &n = CommandNames();
  return std::find(n.begin(), n.end(), name) != n.end();
}

void RunCommand(const std::string &name, const RunConfig &cfg, std::ostream &log) {
  cfg.Validate();
  if (name == "prepare")
    CmdPrepare(cfg, log);
  else if (name == "train")
    CmdTrain(cfg, log);
  else if (name == "decode")
    CmdDecode(cfg, log);
  else if (name == "score")
    CmdScore(cfg, log);
  else if (name == "selftrain")
    CmdSelfTrain(cfg, log);
  else if (name == "report")
    CmdReport(cfg, log);
  else
    throw ConfigError("unknown command '" + name + "'");
}

Utterance CutClip(const Utterance &utt, const ClipWindow &clip,
                  const NormalizationRules &rules) {
  const double period = utt.frame_period;
  const std::size_t total = utt.num_frames();
  const auto first = static_cast<std::size_t>(std::max(0L, std::lround(clip.start / period)));
  const auto last = std::min<std::size_t>(
      total, static_cast<std::size_t>(std::max(0L, std::lround(clip.end / period))));
  if (first == 0 && last >= total) return utt;
  if (first >= last)
    throw std::invalid_argument("clip outside utterance " + utt.id);

  Utterance c;
  c.id = utt.id + "@" + std::to_string(std::llround(clip.start * 1000.0));
  c.story_id = utt.story_id;
  c.frame_period = period;
  c.feature_dim = utt.feature_dim;
  c.features.assign(utt.features.begin() + first * utt.feature_dim,
                    utt.features.begin() + last * utt.feature_dim);
  const double offset = first * period;
  c.duration = (last - first) * period;
  const double slack = 1e-9;
  for (const auto &w : utt.words) {
    if (w.start >= offset - slack && w.end <= offset + c.duration + slack) {
      c.words.push_back({w.token, std::max(0.0, w.start - offset),
                         std::min(c.duration, w.end - offset)});
      c.transcript_raw += (c.transcript_raw.empty() ? "" : " ") + w.token;
    }
  }
  c.transcript_norm = NormalizeTranscript(c.transcript_raw, rules);
  std::vector<AccentEvent> accents;
  for (const auto &e : utt.accents.events()) {
    const double s = std::max(e.start, offset);
    const double t = std::min(e.end, offset + c.duration);
    if (t > s) accents.push_back({s - offset, t - offset});
  }
  c.accents = EventSet(std::move(accents));
  return c;
}

}  // namespace prosody
