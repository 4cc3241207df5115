// include/dlid/model.h

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

#ifndef DLID_MODEL_H_
#define DLID_MODEL_H_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dlid/autodiff.h"
#include "dlid/masking.h"
#include "dlid/ops.h"
#include "dlid/tensor.h"

namespace dlid {

enum class PositionalEncoding { kOff, kSinusoidal };

/// Layer sizes of the x-vector self-attention classifier.  Defaults are the
/// full-size configuration; desk-scale runs override them from a config file.
struct ModelConfig {
  std::size_t feat_dim = 80;
  std::size_t seg_frames = 20;  // frames per segment (K)
  std::vector<std::size_t> tdnn_dims{512, 512, 512};
  std::vector<std::size_t> tdnn_kernels{5, 5, 1};
  std::vector<std::size_t> tdnn_dilations{1, 2, 1};
  std::size_t embed_dim = 64;  // segment embedding width
  std::size_t d_model = 512;
  std::size_t n_heads = 8;
  std::size_t d_ff = 2048;
  std::size_t n_encoder_layers = 2;
  std::vector<std::size_t> head_dims{512, 512, 14};
  std::size_t n_langs = 14;
  PositionalEncoding positional_encoding = PositionalEncoding::kOff;

  // Throws ConfigError naming the first inconsistent field.
  void Validate() const;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

nlohmann::json ToJson(const ModelConfig &config);
// Strict: unknown keys are errors.  Missing keys keep their defaults.
ModelConfig ModelConfigFromJson(const nlohmann::json &j, const std::string &context = "model");

/// Named parameter tensors in a fixed creation order (the order is part of
/// the checkpoint format).
template <typename Real>
class ModelParams {
 public:
  void Add(std::string name, Tensor<Real> value);

  const Tensor<Real> &at(const std::string &name) const;
  Tensor<Real> &at(const std::string &name);
  bool contains(const std::string &name) const { return index_.count(name) != 0; }

  std::size_t size() const { return entries_.size(); }
  std::size_t TotalElements() const;

  const std::vector<std::pair<std::string, Tensor<Real>>> &entries() const { return entries_; }
  std::vector<std::pair<std::string, Tensor<Real>>> &entries() { return entries_; }

  template <typename Other>
  ModelParams<Other> Cast() const {
    ModelParams<Other> out;
    for (const auto &[name, t] : entries_) out.Add(name, t.template Cast<Other>());
    return out;
  }

  friend bool operator==(const ModelParams &a, const ModelParams &b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::pair<std::string, Tensor<Real>>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Parameter name -> tape node for one forward/backward pass.
class BoundParams {
 public:
  void Set(const std::string &name, Var v) { vars_[name] = v; }
  Var operator[](const std::string &name) const;
  const std::map<std::string, Var> &vars() const { return vars_; }

 private:
  std::map<std::string, Var> vars_;
};

// Xavier-uniform weights, zero biases, unit layer-norm gains.  Each tensor
// draws from its own stream keyed by (seed, name).
template <typename Real>
ModelParams<Real> InitParams(const ModelConfig &config, std::uint64_t seed);

// Parameter nodes aliasing `params` (no copies).  With trainable false the
// nodes carry no gradient.
template <typename Real>
BoundParams BindParams(Tape<Real> &tape, const ModelParams<Real> &params, bool trainable = true);

/// frames x F -> T x K x F with T = floor(frames / K); trailing frames that
/// do not fill a segment are dropped.  Throws std::invalid_argument
/// ("utterance too short") when frames < K.
template <typename Real>
Tensor<Real> SegmentFrames(const Tensor<Real> &feats, std::size_t seg_frames);

// Per-segment x-vector: TDNN stack with ReLU, statistics pooling over the K
// frames, linear projection.  segments is N x K x F or B x T x K x F; the
// result is N x D_e or B x T x D_e.  Row t depends on segment t only.
template <typename Real>
Var XvectorEmbed(Tape<Real> &tape, const BoundParams &p, const ModelConfig &config,
                 Var segments);

// Batched variant over zero-padded B x T x K x F segments where utterance b
// has lengths[b] real segments: only real segments go through the TDNN
// stack, padded positions get zero embeddings.  Returns B x T x D_e.
template <typename Real>
Var XvectorEmbedPadded(Tape<Real> &tape, const BoundParams &p, const ModelConfig &config,
                       const Tensor<Real> &padded_segments, std::span<const std::size_t> lengths);

// Input projection to d_model (plus optional sinusoidal positions) followed
// by the post-norm transformer encoder layers with masked self-attention.
template <typename Real>
Var Encode(Tape<Real> &tape, const BoundParams &p, const ModelConfig &config, Var embeddings,
           MaskView mask, std::vector<std::size_t> *fully_masked = nullptr);

// Masked statistics pooling over segments, then the classifier head.
// Returns raw language logits (Q or B x Q).
template <typename Real>
Var UtteranceLogits(Tape<Real> &tape, const BoundParams &p, const ModelConfig &config,
                    Var encoded, MaskView mask);

// Encode + UtteranceLogits on precomputed segment embeddings.
template <typename Real>
Var LogitsFromEmbeddings(Tape<Real> &tape, const BoundParams &p, const ModelConfig &config,
                         Var embeddings, MaskView mask);

// Segments (T x K x F or B x T x K x F) to logits.
template <typename Real>
Var ForwardSegments(Tape<Real> &tape, const BoundParams &p, const ModelConfig &config,
                    Var segments, MaskView mask);

/// Inference on one utterance: segment_frames -> embed -> encode -> logits.
/// The mask covers the utterance's T segments.
template <typename Real>
Tensor<Real> Forward(const ModelParams<Real> &params, const ModelConfig &config,
                     const Tensor<Real> &feats, const AttentionMask &mask);

// T x d table of sin/cos positions.
template <typename Real>
Tensor<Real> SinusoidalPositions(std::size_t length, std::size_t d_model);

}  // namespace dlid

#endif  // DLID_MODEL_H_
