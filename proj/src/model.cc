// src/model.cc

// Copyright 2026  The dlid Authors

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

#include "dlid/model.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "dlid/errors.h"
#include "dlid/json-fields.h"
#include "dlid/keyed-rng.h"

namespace dlid {

void ModelConfig::Validate() const {
  auto fail = [](const std::string &field, const std::string &why) {
    throw ConfigError("model." + field + ": " + why);
  };
  auto positive = [&](const std::string &field, std::size_t v) {
    if (v < 1) fail(field, "must be >= 1");
  };
  positive("feat_dim", feat_dim);
  positive("seg_frames", seg_frames);
  positive("embed_dim", embed_dim);
  positive("d_model", d_model);
  positive("n_heads", n_heads);
  positive("d_ff", d_ff);
  positive("n_langs", n_langs);
  if (tdnn_dims.empty()) fail("tdnn_dims", "needs at least one layer");
  if (tdnn_kernels.size() != tdnn_dims.size())
    fail("tdnn_kernels", "must have one entry per TDNN layer");
  if (tdnn_dilations.size() != tdnn_dims.size())
    fail("tdnn_dilations", "must have one entry per TDNN layer");
  for (std::size_t i = 0; i < tdnn_dims.size(); ++i) {
    positive("tdnn_dims", tdnn_dims[i]);
    positive("tdnn_dilations", tdnn_dilations[i]);
    if (tdnn_kernels[i] % 2 == 0) fail("tdnn_kernels", "kernel sizes must be odd");
  }
  if (d_model % n_heads != 0) fail("n_heads", "must divide d_model");
  if (head_dims.empty()) fail("head_dims", "needs at least one layer");
  for (std::size_t v : head_dims) positive("head_dims", v);
  if (head_dims.back() != n_langs) fail("head_dims", "last entry must equal n_langs");
}

nlohmann::json ToJson(const ModelConfig &c) {
  return nlohmann::json{
      {"feat_dim", c.feat_dim},
      {"seg_frames", c.seg_frames},
      {"tdnn_dims", c.tdnn_dims},
      {"tdnn_kernels", c.tdnn_kernels},
      {"tdnn_dilations", c.tdnn_dilations},
      {"embed_dim", c.embed_dim},
      {"d_model", c.d_model},
      {"n_heads", c.n_heads},
      {"d_ff", c.d_ff},
      {"n_encoder_layers", c.n_encoder_layers},
      {"head_dims", c.head_dims},
      {"n_langs", c.n_langs},
      {"positional_encoding",
       c.positional_encoding == PositionalEncoding::kOff ? "off" : "sinusoidal"},
  };
}

ModelConfig ModelConfigFromJson(const nlohmann::json &j, const std::string &context) {
  ModelConfig c;
  JsonFields f(j, context);
  f.Get("feat_dim", c.feat_dim);
  f.Get("seg_frames", c.seg_frames);
  f.Get("tdnn_dims", c.tdnn_dims);
  f.Get("tdnn_kernels", c.tdnn_kernels);
  f.Get("tdnn_dilations", c.tdnn_dilations);
  f.Get("embed_dim", c.embed_dim);
  f.Get("d_model", c.d_model);
  f.Get("n_heads", c.n_heads);
  f.Get("d_ff", c.d_ff);
  f.Get("n_encoder_layers", c.n_encoder_layers);
  f.Get("head_dims", c.head_dims);
  f.Get("n_langs", c.n_langs);
  std::string pe = "off";
  f.Get("positional_encoding", pe);
  if (pe == "off")
    c.positional_encoding = PositionalEncoding::kOff;
  else if (pe == "sinusoidal")
    c.positional_encoding = PositionalEncoding::kSinusoidal;
  else
    throw ConfigError(f.Path("positional_encoding") + ": expected off|sinusoidal, got '" + pe +
                      "'");
  f.Finish();
  c.Validate();
  return c;
}

template <typename Real>
void ModelParams<Real>::Add(std::string name, Tensor<Real> value) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(std::move(name), std::move(value));
}

template <typename Real>
const Tensor<Real> &ModelParams<Real>::at(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return entries_[it->second].second;
}

template <typename Real>
Tensor<Real> &ModelParams<Real>::at(const std::string &name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return entries_[it->second].second;
}

template <typename Real>
std::size_t ModelParams<Real>::TotalElements() const {
  std::size_t n = 0;
  for (const auto &e : entries_) n += e.second.size();
  return n;
}

Var BoundParams::operator[](const std::string &name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw std::out_of_range("parameter not bound: " + name);
  return it->second;
}

namespace {

std::string Tdnn(std::size_t i) { return "tdnn" + std::to_string(i); }
std::string Enc(std::size_t l) { return "enc" + std::to_string(l); }
std::string Head(std::size_t i) { return "head" + std::to_string(i); }

template <typename Real>
Tensor<Real> Xavier(Shape shape, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed,
                    const std::string &name) {
  KeyedStream rng(seed, {HashString(name)});
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<Real> t(std::move(shape));
  for (Real &v : t.values()) v = static_cast<Real>(dist(rng));
  return t;
}

template <typename Real>
void AddLinear(ModelParams<Real> &p, const std::string &name, std::size_t in, std::size_t out,
               std::uint64_t seed) {
  p.Add(name + ".weight", Xavier<Real>({in, out}, in, out, seed, name + ".weight"));
  p.Add(name + ".bias", Tensor<Real>({out}));
}

template <typename Real>
void AddLayerNorm(ModelParams<Real> &p, const std::string &name, std::size_t d) {
  p.Add(name + ".gamma", Tensor<Real>({d}, Real(1)));
  p.Add(name + ".beta", Tensor<Real>({d}));
}

template <typename Real>
Var LinearLayer(Tape<Real> &tape, const BoundParams &p, const std::string &name, Var x) {
  return Linear(tape, x, p[name + ".weight"], p[name + ".bias"]);
}

}  // namespace

template <typename Real>
ModelParams<Real> InitParams(const ModelConfig &c, std::uint64_t seed) {
  c.Validate();
  ModelParams<Real> p;
  std::size_t in = c.feat_dim;
  for (std::size_t i = 0; i < c.tdnn_dims.size(); ++i) {
    const std::size_t out = c.tdnn_dims[i], k = c.tdnn_kernels[i];
    p.Add(Tdnn(i) + ".weight",
          Xavier<Real>({out, in, k}, in * k, out * k, seed, Tdnn(i) + ".weight"));
    p.Add(Tdnn(i) + ".bias", Tensor<Real>({out}));
    in = out;
  }
  AddLinear(p, "seg_proj", 2 * in, c.embed_dim, seed);
  AddLinear(p, "in_proj", c.embed_dim, c.d_model, seed);
  for (std::size_t l = 0; l < c.n_encoder_layers; ++l) {
    for (const char *proj : {".q", ".k", ".v", ".o"})
      AddLinear(p, Enc(l) + proj, c.d_model, c.d_model, seed);
    AddLayerNorm(p, Enc(l) + ".ln1", c.d_model);
    AddLinear(p, Enc(l) + ".ff1", c.d_model, c.d_ff, seed);
    AddLinear(p, Enc(l) + ".ff2", c.d_ff, c.d_model, seed);
    AddLayerNorm(p, Enc(l) + ".ln2", c.d_model);
  }
  in = 2 * c.d_model;
  for (std::size_t i = 0; i < c.head_dims.size(); ++i) {
    AddLinear(p, Head(i), in, c.head_dims[i], seed);
    in = c.head_dims[i];
  }
  return p;
}

template <typename Real>
BoundParams BindParams(Tape<Real> &tape, const ModelParams<Real> &params, bool trainable) {
  BoundParams b;
  for (const auto &[name, t] : params.entries()) b.Set(name, tape.Parameter(t, trainable));
  return b;
}

template <typename Real>
Tensor<Real> SegmentFrames(const Tensor<Real> &feats, std::size_t seg_frames) {
  if (feats.rank() != 2) throw std::invalid_argument("SegmentFrames: features must be frames x F");
  if (seg_frames == 0) throw std::invalid_argument("SegmentFrames: K must be positive");
  const std::size_t frames = feats.dim(0), dim = feats.dim(1);
  if (frames < seg_frames) throw std::invalid_argument("utterance too short");
  const std::size_t t = frames / seg_frames;
  std::vector<Real> data(feats.data(), feats.data() + t * seg_frames * dim);
  return Tensor<Real>({t, seg_frames, dim}, std::move(data));
}

template <typename Real>
Var XvectorEmbed(Tape<Real> &tape, const BoundParams &p, const ModelConfig &c, Var segments) {
  const Shape in_shape = tape.value(segments).shape();
  if (in_shape.size() != 3 && in_shape.size() != 4)
    throw std::invalid_argument("XvectorEmbed: segments must be N x K x F or B x T x K x F");
  if (in_shape.back() != c.feat_dim || in_shape[in_shape.size() - 2] != c.seg_frames)
    throw std::invalid_argument("XvectorEmbed: segment shape " + ShapeString(in_shape) +
                                " does not match K=" + std::to_string(c.seg_frames) +
                                ", F=" + std::to_string(c.feat_dim));
  std::size_t n = in_shape[0] * (in_shape.size() == 4 ? in_shape[1] : 1);
  Var h = in_shape.size() == 4 ? Reshape(tape, segments, {n, c.seg_frames, c.feat_dim}) : segments;
  for (std::size_t i = 0; i < c.tdnn_dims.size(); ++i) {
    h = Conv1d(tape, h, p[Tdnn(i) + ".weight"], p[Tdnn(i) + ".bias"], c.tdnn_dilations[i]);
    h = Relu(tape, h);
  }
  h = StatsPool(tape, h, {});
  h = LinearLayer(tape, p, "seg_proj", h);
  if (in_shape.size() == 4) h = Reshape(tape, h, {in_shape[0], in_shape[1], c.embed_dim});
  return h;
}

template <typename Real>
Var XvectorEmbedPadded(Tape<Real> &tape, const BoundParams &p, const ModelConfig &c,
                       const Tensor<Real> &padded, std::span<const std::size_t> lengths) {
  if (padded.rank() != 4 || padded.dim(0) != lengths.size())
    throw std::invalid_argument("XvectorEmbedPadded: expected B x T x K x F with B lengths");
  const std::size_t batch = padded.dim(0), t_max = padded.dim(1);
  const std::size_t seg_size = padded.dim(2) * padded.dim(3);
  std::vector<std::size_t> dest;
  std::vector<Real> packed;
  for (std::size_t b = 0; b < batch; ++b) {
    if (lengths[b] < 1 || lengths[b] > t_max)
      throw std::invalid_argument("XvectorEmbedPadded: bad utterance length");
    for (std::size_t t = 0; t < lengths[b]; ++t) {
      dest.push_back(b * t_max + t);
      const Real *src = padded.data() + (b * t_max + t) * seg_size;
      packed.insert(packed.end(), src, src + seg_size);
    }
  }
  Var segs = tape.Constant(
      Tensor<Real>({dest.size(), padded.dim(2), padded.dim(3)}, std::move(packed)));
  Var emb = XvectorEmbed(tape, p, c, segs);
  emb = ScatterRows(tape, emb, dest, batch * t_max);
  return Reshape(tape, emb, {batch, t_max, c.embed_dim});
}

template <typename Real>
Tensor<Real> SinusoidalPositions(std::size_t length, std::size_t d_model) {
  Tensor<Real> pe({length, d_model});
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t i = 0; i < d_model; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / d_model);
      pe(t, i) = static_cast<Real>(i % 2 == 0 ? std::sin(t * freq) : std::cos(t * freq));
    }
  return pe;
}

template <typename Real>
Var Encode(Tape<Real> &tape, const BoundParams &p, const ModelConfig &c, Var embeddings,
           MaskView mask, std::vector<std::size_t> *fully_masked) {
  Var x = LinearLayer(tape, p, "in_proj", embeddings);
  if (c.positional_encoding == PositionalEncoding::kSinusoidal) {
    const Shape &s = tape.value(x).shape();
    x = AddConstant(tape, x, SinusoidalPositions<Real>(s[s.size() - 2], c.d_model));
  }
  for (std::size_t l = 0; l < c.n_encoder_layers; ++l) {
    const std::string e = Enc(l);
    Var q = LinearLayer(tape, p, e + ".q", x);
    Var k = LinearLayer(tape, p, e + ".k", x);
    Var v = LinearLayer(tape, p, e + ".v", x);
    Var att = MaskedAttention(tape, q, k, v, mask, c.n_heads, fully_masked);
    att = LinearLayer(tape, p, e + ".o", att);
    x = LayerNorm(tape, Add(tape, x, att), p[e + ".ln1.gamma"], p[e + ".ln1.beta"]);
    Var ff = Relu(tape, LinearLayer(tape, p, e + ".ff1", x));
    ff = LinearLayer(tape, p, e + ".ff2", ff);
    x = LayerNorm(tape, Add(tape, x, ff), p[e + ".ln2.gamma"], p[e + ".ln2.beta"]);
  }
  return x;
}

template <typename Real>
Var UtteranceLogits(Tape<Real> &tape, const BoundParams &p, const ModelConfig &c, Var encoded,
                    MaskView mask) {
  Var h = StatsPool(tape, encoded, mask);
  for (std::size_t i = 0; i < c.head_dims.size(); ++i) {
    h = LinearLayer(tape, p, Head(i), h);
    if (i + 1 < c.head_dims.size()) h = Relu(tape, h);
  }
  return h;
}

template <typename Real>
Var LogitsFromEmbeddings(Tape<Real> &tape, const BoundParams &p, const ModelConfig &c,
                         Var embeddings, MaskView mask) {
  return UtteranceLogits(tape, p, c, Encode(tape, p, c, embeddings, mask), mask);
}

template <typename Real>
Var ForwardSegments(Tape<Real> &tape, const BoundParams &p, const ModelConfig &c, Var segments,
                    MaskView mask) {
  return LogitsFromEmbeddings(tape, p, c, XvectorEmbed(tape, p, c, segments), mask);
}

template <typename Real>
Tensor<Real> Forward(const ModelParams<Real> &params, const ModelConfig &c,
                     const Tensor<Real> &feats, const AttentionMask &mask) {
  Tensor<Real> segments = SegmentFrames(feats, c.seg_frames);
  if (mask.size() != segments.dim(0))
    throw std::invalid_argument("Forward: mask covers " + std::to_string(mask.size()) +
                                " segments, utterance has " + std::to_string(segments.dim(0)));
  Tape<Real> tape;
  BoundParams bound = BindParams(tape, params, false);
  Var seg = tape.Constant(std::move(segments));
  return tape.value(ForwardSegments(tape, bound, c, seg, mask.view()));
}

#define DLID_INSTANTIATE_MODEL(Real)                                                          \
  template class ModelParams<Real>;                                                           \
  template ModelParams<Real> InitParams<Real>(const ModelConfig &, std::uint64_t);            \
  template BoundParams BindParams<Real>(Tape<Real> &, const ModelParams<Real> &, bool);       \
  template Tensor<Real> SegmentFrames<Real>(const Tensor<Real> &, std::size_t);               \
  template Var XvectorEmbed<Real>(Tape<Real> &, const BoundParams &, const ModelConfig &,     \
                                  Var);                                                       \
  template Var XvectorEmbedPadded<Real>(Tape<Real> &, const BoundParams &,                    \
                                        const ModelConfig &, const Tensor<Real> &,            \
                                        std::span<const std::size_t>);                        \
  template Var Encode<Real>(Tape<Real> &, const BoundParams &, const ModelConfig &, Var,      \
                            MaskView, std::vector<std::size_t> *);                            \
  template Var UtteranceLogits<Real>(Tape<Real> &, const BoundParams &, const ModelConfig &,  \
                                     Var, MaskView);                                          \
  template Var LogitsFromEmbeddings<Real>(Tape<Real> &, const BoundParams &,                  \
                                          const ModelConfig &, Var, MaskView);                \
  template Var ForwardSegments<Real>(Tape<Real> &, const BoundParams &, const ModelConfig &,  \
                                     Var, MaskView);                                          \
  template Tensor<Real> Forward<Real>(const ModelParams<Real> &, const ModelConfig &,         \
                                      const Tensor<Real> &, const AttentionMask &);           \
  template Tensor<Real> SinusoidalPositions<Real>(std::size_t, std::size_t);

DLID_INSTANTIATE_MODEL(float)
DLID_INSTANTIATE_MODEL(double)

}  // namespace dlid
