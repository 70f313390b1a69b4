// model.cc

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

#include "prosody/model.h"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace prosody {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using MatMap = Eigen::Map<Mat>;
using CMatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<Vec>;
using CVecMap = Eigen::Map<const Vec>;

constexpr double kLayerNormEps = 1e-5;
constexpr double kBceClamp = 1e-12;

// Intermediate values of one forward pass, kept for backpropagation.
struct Activations {
  std::size_t frames = 0;
  Mat x;        // T x F
  Mat u;        // T x F, input projection
  Mat hf, hb;   // T x H/2
  Mat e;        // T x H
  Mat logp;     // T x V
  Mat a;        // T x H, prosody pre-norm
  Mat n;        // T x H, normalized
  Vec inv_std;  // T
  Mat ln_out;   // T x H
  Vec y;        // T
};

class Views {
 public:
  Views(const JointModel &m) : m_(m) {}
  CMatMap M(const char *name) const {
    const auto &b = m_.layout().Get(name);
    return CMatMap(m_.params().data() + b.offset, b.rows, b.cols);
  }
  CVecMap V(const char *name) const {
    const auto &b = m_.layout().Get(name);
    return CVecMap(m_.params().data() + b.offset, b.size());
  }

 private:
  const JointModel &m_;
};

class GradViews {
 public:
  GradViews(const ParamLayout &layout, std::vector<double> &g)
      : layout_(layout), g_(g) {}
  MatMap M(const char *name) {
    const auto &b = layout_.Get(name);
    return MatMap(g_.data() + b.offset, b.rows, b.cols);
  }
  VecMap V(const char *name) {
    const auto &b = layout_.Get(name);
    return VecMap(g_.data() + b.offset, b.size());
  }

 private:
  const ParamLayout &layout_;
  std::vector<double> &g_;
};

Activations RunForward(const JointModel &model, std::span<const float> features,
                       std::size_t frames) {
  const ModelDims &d = model.dims();
  if (frames == 0) throw std::invalid_argument("forward: zero frames");
  if (features.size() != frames * d.input_dim)
    throw std::invalid_argument(
        "forward: expected " + std::to_string(frames) + " x " +
        std::to_string(d.input_dim) + " features, got " +
        std::to_string(features.size()) + " values");
  Views p(model);
  Activations act;
  act.frames = frames;
  const std::size_t T = frames, half = d.hidden_dim / 2;
  act.x = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>(features.data(), T,
                                                           d.input_dim)
              .cast<double>();
  act.u = (act.x * p.M("in_w").transpose()).rowwise() +
          p.V("in_b").transpose();

  act.hf.setZero(T, half);
  act.hb.setZero(T, half);
  const auto fwx = p.M("fw_x"), fwh = p.M("fw_h");
  const auto bwx = p.M("bw_x"), bwh = p.M("bw_h");
  const auto fwb = p.V("fw_b"), bwb = p.V("bw_b");
  for (std::size_t t = 0; t < T; ++t) {
    Vec pre = fwx * act.u.row(t).transpose() + fwb;
    if (t > 0) pre += fwh * act.hf.row(t - 1).transpose();
    act.hf.row(t) = pre.array().tanh().transpose();
  }
  for (std::size_t t = T; t-- > 0;) {
    Vec pre = bwx * act.u.row(t).transpose() + bwb;
    if (t + 1 < T) pre += bwh * act.hb.row(t + 1).transpose();
    act.hb.row(t) = pre.array().tanh().transpose();
  }
  act.e.resize(T, d.hidden_dim);
  act.e << act.hf, act.hb;

  Mat z = (act.e * p.M("asr_w").transpose()).rowwise() +
          p.V("asr_b").transpose();
  act.logp.resize(T, d.vocab_size);
  for (std::size_t t = 0; t < T; ++t) {
    const double mx = z.row(t).maxCoeff();
    const double lse = mx + std::log((z.row(t).array() - mx).exp().sum());
    act.logp.row(t) = z.row(t).array() - lse;
  }

  act.a = (act.e * p.M("pro_w1").transpose()).rowwise() +
          p.V("pro_b1").transpose();
  act.n.resize(T, d.hidden_dim);
  act.inv_std.resize(T);
  const double H = static_cast<double>(d.hidden_dim);
  for (std::size_t t = 0; t < T; ++t) {
    const double mu = act.a.row(t).sum() / H;
    const double var = (act.a.row(t).array() - mu).square().sum() / H;
    act.inv_std[t] = 1.0 / std::sqrt(var + kLayerNormEps);
    act.n.row(t) = (act.a.row(t).array() - mu) * act.inv_std[t];
  }
  act.ln_out = (act.n.array().rowwise() * p.V("ln_g").transpose().array())
                   .matrix()
                   .rowwise() +
               p.V("ln_b").transpose();
  const Vec s = (act.ln_out * p.V("pro_w2")).array() + p.V("pro_b2")[0];
  act.y = s.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return act;
}

LogProbGrid ToGrid(const Mat &logp) {
  LogProbGrid grid(logp.rows(), logp.cols());
  for (Eigen::Index t = 0; t < logp.rows(); ++t)
    for (Eigen::Index v = 0; v < logp.cols(); ++v) grid(t, v) = logp(t, v);
  return grid;
}

}  // namespace

void ModelDims::Validate() const {
  if (input_dim == 0 || hidden_dim < 2 || hidden_dim % 2 != 0 || vocab_size < 2)
    throw std::invalid_argument(
        "model dims: need F >= 1, even H >= 2 and V >= 2");
}

ParamLayout::ParamLayout(const ModelDims &d) {
  d.Validate();
  const std::size_t F = d.input_dim, H = d.hidden_dim, half = H / 2,
                    V = d.vocab_size;
  auto add = [this](const char *name, ParamGroup g, std::size_t r,
                    std::size_t c) {
    blocks_.push_back({name, g, total_, r, c});
    total_ += r * c;
  };
  add("in_w", ParamGroup::kInput, F, F);
  add("in_b", ParamGroup::kInput, F, 1);
  add("fw_x", ParamGroup::kEncoder, half, F);
  add("fw_h", ParamGroup::kEncoder, half, half);
  add("fw_b", ParamGroup::kEncoder, half, 1);
  add("bw_x", ParamGroup::kEncoder, half, F);
  add("bw_h", ParamGroup::kEncoder, half, half);
  add("bw_b", ParamGroup::kEncoder, half, 1);
  add("asr_w", ParamGroup::kAsrHead, V, H);
  add("asr_b", ParamGroup::kAsrHead, V, 1);
  add("pro_w1", ParamGroup::kProsodyHead, H, H);
  add("pro_b1", ParamGroup::kProsodyHead, H, 1);
  add("ln_g", ParamGroup::kProsodyHead, H, 1);
  add("ln_b", ParamGroup::kProsodyHead, H, 1);
  add("pro_w2", ParamGroup::kProsodyHead, H, 1);
  add("pro_b2", ParamGroup::kProsodyHead, 1, 1);
}

const ParamBlock &ParamLayout::Get(const std::string &name) const {
  for (const auto &b : blocks_)
    if (b.name == name) return b;
  throw std::invalid_argument("no parameter block named " + name);
}

JointModel::JointModel(const ModelDims &dims)
    : dims_(dims), layout_(dims), params_(layout_.total(), 0.0) {}

JointModel JointModel::Random(const ModelDims &dims, std::uint64_t seed) {
  JointModel m(dims);
  std::mt19937_64 rng(seed);
  for (const auto &b : m.layout_.blocks()) {
    auto block = m.Block(b.name);
    if (b.name == "ln_g") {
      std::fill(block.begin(), block.end(), 1.0);
    } else if (b.cols > 1 || b.name == "pro_w2") {
      const double fan_in = b.name == "pro_w2" ? static_cast<double>(b.rows)
                                               : static_cast<double>(b.cols);
      std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in),
                                               1.0 / std::sqrt(fan_in));
      for (auto &v : block) v = u(rng);
    }
  }
  return m;
}

std::span<double> JointModel::Block(const std::string &name) {
  const auto &b = layout_.Get(name);
  return {params_.data() + b.offset, b.size()};
}

std::span<const double> JointModel::Block(const std::string &name) const {
  const auto &b = layout_.Get(name);
  return {params_.data() + b.offset, b.size()};
}

bool JointModel::AllFinite() const {
  return std::all_of(params_.begin(), params_.end(),
                     [](double v) { return std::isfinite(v); });
}

ModelOutput JointModel::Forward(std::span<const float> features,
                                std::size_t frames, double frame_period) const {
  Activations act = RunForward(*this, features, frames);
  ModelOutput out;
  out.asr = ToGrid(act.logp);
  out.prosody.frame_period = frame_period;
  out.prosody.values.assign(act.y.data(), act.y.data() + act.y.size());
  return out;
}

namespace {

double ProsodyLoss(const std::vector<double> &y, const std::vector<double> &lab,
                   ProsodyLossKind kind) {
  double acc = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (kind == ProsodyLossKind::kMse) {
      const double d = y[t] - lab[t];
      acc += d * d;
    } else {
      const double p = std::clamp(y[t], kBceClamp, 1.0 - kBceClamp);
      acc -= lab[t] * std::log(p) + (1.0 - lab[t]) * std::log(1.0 - p);
    }
  }
  return y.empty() ? 0.0 : acc / static_cast<double>(y.size());
}

}  // namespace

JointLossBreakdown JointLoss(const LogProbGrid &asr_out,
                             const FrameTrack &prosody_out,
                             const LabelSeq &target,
                             const FrameTrack &target_frames, double lambda,
                             ProsodyLossKind kind) {
  if (prosody_out.size() != target_frames.size())
    throw std::invalid_argument("joint loss: prosody output has " +
                                std::to_string(prosody_out.size()) +
                                " frames, labels have " +
                                std::to_string(target_frames.size()));
  if (lambda < 0) throw std::invalid_argument("joint loss: negative lambda");
  JointLossBreakdown r;
  r.lambda = lambda;
  r.l_asr = CtcForward(asr_out, target).nll;
  r.l_pad = ProsodyLoss(prosody_out.values, target_frames.values, kind);
  r.l_j = r.l_asr + lambda * r.l_pad;
  return r;
}

LossGradient ComputeLossGradient(const JointModel &model,
                                 const TrainExample &ex, double lambda,
                                 ProsodyLossKind kind) {
  const ModelDims &d = model.dims();
  const Activations act = RunForward(model, ex.features, ex.frames);
  const std::size_t T = act.frames, H = d.hidden_dim, half = H / 2;
  if (ex.labels.size() != T)
    throw std::invalid_argument("example " + ex.id +
                                ": label track length differs from frames");

  const LogProbGrid grid = ToGrid(act.logp);
  CtcGradient ctc = CtcGrad(grid, ex.target);

  LossGradient out;
  out.loss.lambda = lambda;
  out.loss.l_asr = ctc.loss.nll;
  std::vector<double> y(act.y.data(), act.y.data() + T);
  out.loss.l_pad = ProsodyLoss(y, ex.labels.values, kind);
  out.loss.l_j = out.loss.l_asr + lambda * out.loss.l_pad;
  out.grad.assign(model.layout().total(), 0.0);

  Views p(model);
  GradViews g(model.layout(), out.grad);

  // d l / d logit of the prosody output.
  Vec ds(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double yt = act.y[t], lt = ex.labels.values[t];
    if (kind == ProsodyLossKind::kMse)
      ds[t] = lambda * 2.0 * (yt - lt) / static_cast<double>(T) * yt * (1.0 - yt);
    else
      ds[t] = lambda * (yt - lt) / static_cast<double>(T);
  }
  const CMatMap dz(ctc.grad.data(), T, d.vocab_size);

  // Prosody head.
  g.V("pro_w2") = act.ln_out.transpose() * ds;
  g.V("pro_b2")[0] = ds.sum();
  Mat d_ln = ds * p.V("pro_w2").transpose();
  g.V("ln_g") = (d_ln.array() * act.n.array()).colwise().sum().transpose();
  g.V("ln_b") = d_ln.colwise().sum().transpose();
  Mat dn = (d_ln.array().rowwise() * p.V("ln_g").transpose().array()).matrix();
  Mat da(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    const double mean_dn = dn.row(t).mean();
    const double mean_dn_n = dn.row(t).dot(act.n.row(t)) / static_cast<double>(H);
    da.row(t) = act.inv_std[t] *
                (dn.row(t).array() - mean_dn - act.n.row(t).array() * mean_dn_n);
  }
  g.M("pro_w1") = da.transpose() * act.e;
  g.V("pro_b1") = da.colwise().sum().transpose();

  // ASR head.
  g.M("asr_w") = dz.transpose() * act.e;
  g.V("asr_b") = dz.colwise().sum().transpose();

  Mat de = da * p.M("pro_w1") + dz * p.M("asr_w");

  // Encoder, backpropagated through time in each direction.
  Mat du = Mat::Zero(T, d.input_dim);
  {
    auto gx = g.M("fw_x");
    auto gh = g.M("fw_h");
    auto gb = g.V("fw_b");
    const auto wx = p.M("fw_x"), wh = p.M("fw_h");
    Vec carry = Vec::Zero(half);
    for (std::size_t t = T; t-- > 0;) {
      Vec dh = de.row(t).head(half).transpose() + carry;
      Vec dpre = dh.array() * (1.0 - act.hf.row(t).transpose().array().square());
      gx += dpre * act.u.row(t);
      if (t > 0) gh += dpre * act.hf.row(t - 1);
      gb += dpre;
      du.row(t) += (wx.transpose() * dpre).transpose();
      carry = wh.transpose() * dpre;
    }
  }
  {
    auto gx = g.M("bw_x");
    auto gh = g.M("bw_h");
    auto gb = g.V("bw_b");
    const auto wx = p.M("bw_x"), wh = p.M("bw_h");
    Vec carry = Vec::Zero(half);
    for (std::size_t t = 0; t < T; ++t) {
      Vec dh = de.row(t).tail(half).transpose() + carry;
      Vec dpre = dh.array() * (1.0 - act.hb.row(t).transpose().array().square());
      gx += dpre * act.u.row(t);
      if (t + 1 < T) gh += dpre * act.hb.row(t + 1);
      gb += dpre;
      du.row(t) += (wx.transpose() * dpre).transpose();
      carry = wh.transpose() * dpre;
    }
  }
  g.M("in_w") = du.transpose() * act.x;
  g.V("in_b") = du.colwise().sum().transpose();
  return out;
}

double GradCheck(const JointModel &model, const TrainExample &example,
                 const GradCheckOptions &opts) {
  const LossGradient analytic =
      ComputeLossGradient(model, example, opts.lambda, opts.kind);
  const std::size_t total = model.layout().total();
  std::size_t count = static_cast<std::size_t>(
      std::ceil(opts.fraction * static_cast<double>(total)));
  count = std::min(total, std::max(count, opts.min_coords));
  std::vector<std::size_t> coords(total);
  std::iota(coords.begin(), coords.end(), 0);
  std::mt19937_64 rng(opts.seed);
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(count);
  std::sort(coords.begin(), coords.end());

  auto loss_at = [&](const JointModel &m) {
    ModelOutput out = m.Forward(example.features, example.frames,
                                example.labels.frame_period);
    return JointLoss(out.asr, out.prosody, example.target, example.labels,
                     opts.lambda, opts.kind)
        .l_j;
  };
  JointModel probe = model;
  double worst = 0.0;
  for (std::size_t i : coords) {
    const double orig = probe.params()[i];
    probe.params()[i] = orig + opts.eps;
    const double up = loss_at(probe);
    probe.params()[i] = orig - opts.eps;
    const double down = loss_at(probe);
    probe.params()[i] = orig;
    const double numeric = (up - down) / (2.0 * opts.eps);
    const double a = analytic.grad[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), opts.floor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

void SaveCheckpoint(const std::string &path, const JointModel &model,
                    const std::string &config_hash) {
  nlohmann::json header;
  header["format"] = "prosody-joint-model";
  header["version"] = 1;
  header["input_dim"] = model.dims().input_dim;
  header["hidden_dim"] = model.dims().hidden_dim;
  header["vocab_size"] = model.dims().vocab_size;
  header["num_params"] = model.params().size();
  header["config_hash"] = config_hash;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << header.dump() << '\n';
  for (double v : model.params()) {
    std::uint32_t w = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    if constexpr (std::endian::native == std::endian::big)
      w = __builtin_bswap32(w);
    out.write(reinterpret_cast<const char *>(&w), 4);
  }
}

JointModel LoadCheckpoint(const std::string &path, std::string *config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error(path + ": bad checkpoint header: " + e.what());
  }
  if (header.value("format", "") != "prosody-joint-model")
    throw std::runtime_error(path + ": not a joint model checkpoint");
  ModelDims dims{header.at("input_dim").get<std::size_t>(),
                 header.at("hidden_dim").get<std::size_t>(),
                 header.at("vocab_size").get<std::size_t>()};
  JointModel model(dims);
  if (header.at("num_params").get<std::size_t>() != model.params().size())
    throw std::runtime_error(path + ": parameter count mismatch");
  std::vector<char> bytes(model.params().size() * 4);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw std::runtime_error(path + ": truncated parameter blob");
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    std::uint32_t w;
    std::memcpy(&w, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big)
      w = __builtin_bswap32(w);
    model.params()[i] = std::bit_cast<float>(w);
  }
  if (config_hash) *config_hash = header.value("config_hash", "");
  return model;
}

}  // namespace prosody
