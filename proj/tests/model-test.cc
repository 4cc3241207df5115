// tests/model-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "dlid/grad-check.h"
#include "dlid/losses.h"
#include "dlid/model.h"
#include "oracles.h"
#include "test-util.h"

namespace dlid {
namespace {

using testing::MaxAbsDiff;
using testing::RandomTensor;
using testing::ToyConfig;

using testing::RandomSmallConfig;
using testing::Slice;

TEST_CASE("segment_frames") {
  Tensor<double> x = RandomTensor({300, 3}, 1);
  Tensor<double> s = SegmentFrames(x, 20);
  CHECK(s.shape() == Shape{15, 20, 3});
  CHECK(s[0] == x[0]);
  CHECK(s[s.size() - 1] == x[x.size() - 1]);
  CHECK(SegmentFrames(RandomTensor({20, 3}, 1), 20).dim(0) == 1);
  Tensor<double> y = RandomTensor({39, 3}, 2);
  Tensor<double> sy = SegmentFrames(y, 20);
  CHECK(sy.shape() == Shape{1, 20, 3});
  CHECK(sy[59] == y[59]);
  CHECK_THROWS_WITH(SegmentFrames(RandomTensor({19, 3}, 1), 20), "utterance too short");
}

TEST_CASE("default config shapes") {
  ModelConfig c;
  c.Validate();
  ModelParams<float> p = InitParams<float>(c, 1);
  Tape<float> tape;
  BoundParams b = BindParams(tape, p, false);
  Tensor<float> feats = RandomTensor<float>({3 * 20, 80}, 3);
  Var emb = XvectorEmbed(tape, b, c, tape.Constant(SegmentFrames(feats, 20)));
  CHECK(tape.value(emb).shape() == Shape{3, 64});
  Tensor<float> logits = Forward(p, c, feats, AttentionMask::AllActive(3));
  CHECK(logits.shape() == Shape{14});
  CHECK(logits.AllFinite());
}

TEST_CASE("config validation") {
  ModelConfig c = ToyConfig();
  c.n_heads = 3;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = ToyConfig();
  c.head_dims.back() = 3;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = ToyConfig();
  c.tdnn_kernels[0] = 2;
  CHECK_THROWS_AS(c.Validate(), ConfigError);
  c = ToyConfig();
  CHECK(ModelConfigFromJson(ToJson(c)) == c);
  nlohmann::json j = ToJson(c);
  j["d_modle"] = 8;
  CHECK_THROWS_AS(ModelConfigFromJson(j), ConfigError);
}

TEST_CASE("xvector_embed locality and equivariance") {
  ModelConfig c = ToyConfig();
  ModelParams<double> p = InitParams<double>(c, 2);
  Tape<double> tape;
  BoundParams b = BindParams(tape, p, false);
  Tensor<double> a = RandomTensor({4, 5, 4}, 1), z = RandomTensor({4, 5, 4}, 2);
  for (std::size_t i = 40; i < 60; ++i) z[i] = a[i];  // share segment 2
  Tensor<double> ea = tape.value(XvectorEmbed(tape, b, c, tape.Constant(a)));
  Tensor<double> ez = tape.value(XvectorEmbed(tape, b, c, tape.Constant(z)));
  for (std::size_t d = 0; d < 4; ++d) CHECK(ea(2, d) == ez(2, d));

  const std::vector<std::size_t> perm{3, 0, 2, 1};
  Tensor<double> ap(a.shape());
  for (std::size_t t = 0; t < 4; ++t) std::copy_n(a.data() + perm[t] * 20, 20, ap.data() + t * 20);
  Tensor<double> ep = tape.value(XvectorEmbed(tape, b, c, tape.Constant(ap)));
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t d = 0; d < 4; ++d) CHECK(ep(t, d) == ea(perm[t], d));
}

TEST_CASE("encode with a single position") {
  ModelConfig c = ToyConfig();
  ModelParams<double> p = InitParams<double>(c, 3);
  Tape<double> tape;
  BoundParams b = BindParams(tape, p, false);
  Tensor<double> out = tape.value(Encode(tape, b, c, tape.Constant(RandomTensor({1, 4}, 1)),
                                         AttentionMask::AllActive(1).view()));
  CHECK(out.shape() == Shape{1, 8});
  CHECK(out.AllFinite());
}

TEST_CASE("masked equivalence on random configs") {
  KeyedStream rng(99, {1});
  for (int trial = 0; trial < 40; ++trial) {
    ModelConfig c = RandomSmallConfig(rng);
    c.Validate();
    const std::size_t t = 2 + rng() % 12, ts = 1 + rng() % t;
    const std::size_t frames = t * c.seg_frames + rng() % c.seg_frames;
    Tensor<double> feats = RandomTensor({frames, c.feat_dim}, trial);
    ModelParams<double> p = InitParams<double>(c, trial);
    AttentionMask clip = (trial % 2) ? RandomClipMask(t, ts, rng) : FixedClipMask(t, ts);
    const std::size_t s = clip.FirstActive(), n = clip.num_active();
    Tensor<double> trunc = Slice(feats, s * c.seg_frames, n * c.seg_frames);
    double d64 = MaxAbsDiff(Forward(p, c, feats, clip), Forward(p, c, trunc, AttentionMask::AllActive(n)));
    CHECK(d64 <= 1e-10);
    ModelParams<float> pf = p.Cast<float>();
    double d32 = MaxAbsDiff(Forward(pf, c, feats.Cast<float>(), clip),
                            Forward(pf, c, trunc.Cast<float>(), AttentionMask::AllActive(n)));
    CHECK(d32 <= 1e-5);
  }
}

TEST_CASE("logits are invariant to permuting active segments") {
  ModelConfig c = ToyConfig();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ModelParams<double> p = InitParams<double>(c, seed);
    Tensor<double> feats = RandomTensor({6 * 5, 4}, seed);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    KeyedStream rng(seed, {4});
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor<double> permuted(feats.shape());
    for (std::size_t t = 0; t < 6; ++t) std::copy_n(feats.data() + perm[t] * 20, 20, permuted.data() + t * 20);
    CHECK(MaxAbsDiff(Forward(p, c, feats, AttentionMask::AllActive(6)),
                     Forward(p, c, permuted, AttentionMask::AllActive(6))) <= 1e-12);
  }
}

TEST_CASE("sinusoidal positions break permutation symmetry") {
  ModelConfig c = ToyConfig();
  c.positional_encoding = PositionalEncoding::kSinusoidal;
  ModelParams<double> p = InitParams<double>(c, 1);
  Tensor<double> feats = RandomTensor({3 * 5, 4}, 7);
  Tensor<double> swapped = feats;
  std::swap_ranges(swapped.data(), swapped.data() + 20, swapped.data() + 20);
  CHECK(MaxAbsDiff(Forward(p, c, feats, AttentionMask::AllActive(3)),
                   Forward(p, c, swapped, AttentionMask::AllActive(3))) > 1e-9);
  Tensor<double> pe = SinusoidalPositions<double>(4, 8);
  CHECK(pe(0, 0) == 0.0);
  CHECK(pe(0, 1) == 1.0);
}

TEST_CASE("padded batch matches solo forward") {
  ModelConfig c = ToyConfig();
  ModelParams<float> p = InitParams<float>(c, 5);
  const std::vector<std::size_t> lengths{7, 3, 5};
  const std::size_t t_max = 7, seg = 5 * 4;
  Tensor<float> padded({3, t_max, 5, 4});
  std::vector<Tensor<float>> solo;
  std::vector<AttentionMask> masks;
  for (std::size_t b = 0; b < 3; ++b) {
    solo.push_back(RandomTensor<float>({lengths[b] * 5, 4}, 10 + b));
    std::copy_n(solo[b].data(), lengths[b] * seg, padded.data() + b * t_max * seg);
    masks.push_back(PaddingMask(lengths[b], t_max));
  }
  std::vector<std::uint8_t> flat = FlattenMasks(masks);
  Tape<float> tape;
  BoundParams bp = BindParams(tape, p, false);
  Var emb = XvectorEmbedPadded(tape, bp, c, padded, lengths);
  Tensor<float> batch = tape.value(LogitsFromEmbeddings(tape, bp, c, emb, flat));
  Tensor<float> whole = tape.value(ForwardSegments(tape, bp, c, tape.Constant(padded), flat));
  for (std::size_t b = 0; b < 3; ++b) {
    Tensor<float> one = Forward(p, c, solo[b], AttentionMask::AllActive(lengths[b]));
    for (std::size_t q = 0; q < 2; ++q) {
      CHECK(std::abs(batch(b, q) - one[q]) <= 1e-6f);
      CHECK(std::abs(whole(b, q) - one[q]) <= 1e-6f);
    }
  }
}

TEST_CASE("masked rows do not reach the logits") {
  ModelConfig c = ToyConfig();
  ModelParams<double> p = InitParams<double>(c, 6);
  Tensor<double> feats = RandomTensor({5 * 5, 4}, 8), other = feats;
  for (std::size_t i = 60; i < 100; ++i) other[i] += 3.0;  // segments 3 and 4
  AttentionMask m = PaddingMask(3, 5);
  CHECK(Forward(p, c, feats, m) == Forward(p, c, other, m));
  Tensor<double> single = Forward(p, c, feats, FixedClipMask(5, 1));
  CHECK(single.AllFinite());
}

TEST_CASE("forward is deterministic") {
  ModelConfig c = ToyConfig();
  ModelParams<float> p = InitParams<float>(c, 7);
  CHECK(InitParams<float>(c, 7) == p);
  CHECK_FALSE(InitParams<float>(c, 8) == p);
  Tensor<float> feats = RandomTensor<float>({20, 4}, 1);
  CHECK(Forward(p, c, feats, AttentionMask::AllActive(4)) ==
        Forward(p, c, feats, AttentionMask::AllActive(4)));
}

using testing::EndToEndCheck;

TEST_CASE("end-to-end gradient on the toy config") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (bool dual : {false, true}) {
      GradCheckReport r = EndToEndCheck(ToyConfig(), seed, dual);
      INFO("seed " << seed << " dual " << dual << " " << r.worst);
      CHECK(r.max_rel_err < 1e-4);
    }
  }
}

TEST_CASE("short-mode terms move the shared parameters") {
  ModelConfig c = ToyConfig();
  ModelParams<double> p = InitParams<double>(c, 1);
  Tensor<double> segs = RandomTensor({2, 4, 5, 4}, 2);
  const std::vector<std::uint8_t> clip{0, 1, 1, 0, 1, 1, 0, 0};
  const std::vector<int> labels{0, 1};
  for (LossWeights w : {LossWeights{0.0, 1.0, 2.0}, LossWeights{0.0, 0.0, 2.0}}) {
    Tape<double> tape;
    BoundParams b = BindParams(tape, p, true);
    Var full = tape.Constant(RandomTensor({2, 2}, 3));
    Var shrt = ForwardSegments(tape, b, c, tape.Constant(segs), clip);
    Var loss = DualLoss(tape, CrossEntropy(tape, full, labels), CrossEntropy(tape, shrt, labels),
                        KdLoss(tape, full, shrt, 2.0), w);
    tape.Backward(loss);
    double total = 0;
    for (const auto &[name, v] : b.vars()) {
      const Tensor<double> g = tape.grad(v);
      for (double x : g.values()) total += std::abs(x);
    }
    CHECK(total > 0.0);
  }
}

}  // namespace
}  // namespace dlid
