// tests/data-test.cc

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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dlid/binary-io.h"
#include "dlid/dataset.h"
#include "dlid/errors.h"
#include "dlid/feature-io.h"
#include "dlid/model.h"
#include "dlid/synth.h"
#include "test-util.h"

namespace dlid {
namespace {

namespace fs = std::filesystem;
using testing::MaxAbsDiff;
using testing::RandomTensor;
using testing::TempDir;

std::string Slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST_CASE("feature files round trip bit-exactly") {
  TempDir dir("feat");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Tensor<float> m = RandomTensor<float>({7 + seed * 13, 3 + seed}, seed, 10.0);
    m[0] = -0.0f;
    m[1] = 1e-40f;  // subnormal
    const std::string path = dir / ("m" + std::to_string(seed) + ".fea");
    WriteFeatures(path, m);
    Tensor<float> back = ReadFeatures(path);
    REQUIRE(back.shape() == m.shape());
    CHECK(std::memcmp(back.data(), m.data(), m.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("feature header arithmetic and layout") {
  Tensor<float> m({100, 80}, 0.5f);
  const std::string bytes = EncodeFeatures(m);
  CHECK(bytes.size() == 32000 + 16);
  CHECK(bytes.substr(0, 4) == "FEA1");
  // Little-endian u32 fields.
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[8]) == 100);
  CHECK(static_cast<unsigned char>(bytes[12]) == 80);
  float first;
  std::memcpy(&first, bytes.data() + 16, 4);
  CHECK(first == 0.5f);
}

TEST_CASE("feature decoding errors") {
  Tensor<float> m({4, 3}, 1.0f);
  const std::string good = EncodeFeatures(m);
  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(DecodeFeatures(bad), doctest::Contains("bad magic"), DataError);
  bad = good;
  bad[4] = 2;
  CHECK_THROWS_WITH_AS(DecodeFeatures(bad), doctest::Contains("version"), DataError);
  CHECK_THROWS_AS(DecodeFeatures(good.substr(0, 10)), DataError);
  CHECK_THROWS_WITH_AS(DecodeFeatures(good.substr(0, good.size() - 4)),
                       doctest::Contains("payload length"), DataError);
  CHECK_THROWS_WITH_AS(DecodeFeatures(good + "abcd"), doctest::Contains("payload length"),
                       DataError);
  CHECK_THROWS_AS(ReadFeatures("/nonexistent/dir/x.fea"), DataError);
}

TEST_CASE("manifest round trip and validation") {
  std::vector<ManifestRecord> recs{{"a", "feats/a.fea", "lang0", 300, std::nullopt},
                                   {"b", "/abs/b.fea", "lang1", 120, 60}};
  const std::string text = FormatManifest(recs);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(ParseManifest(text) == recs);
  CHECK(recs[1].usable_frames() == 60);

  const auto bad = [](const std::string &line) { return ParseManifest(line + "\n"); };
  CHECK_THROWS_AS(bad(R"({"id":"a","path":"p","language":"x"})"), DataError);
  CHECK_THROWS_AS(bad(R"({"id":"a","path":"p","language":"x","frames":0})"), DataError);
  CHECK_THROWS_AS(bad(R"({"id":"a","path":"p","language":"x","frames":10,"trunc_frames":11})"),
                  DataError);
  CHECK_THROWS_AS(bad(R"({"id":"a","path":"p","language":"x","frames":10,"extra":1})"), DataError);
  CHECK_THROWS_AS(bad("not json"), DataError);
  CHECK_THROWS_WITH_AS(ParseManifest(text + FormatManifest({recs[0]}), "m.jsonl"),
                       doctest::Contains("m.jsonl:3"), DataError);
}

TEST_CASE("manifest clip augmentation") {
  // K = 20: a 3 s clip is 15 segments = 300 frames.
  std::vector<ManifestRecord> recs{{"long", "l.fea", "lang0", 1000, std::nullopt},
                                   {"short", "s.fea", "lang1", 200, std::nullopt},
                                   {"cut", "c.fea", "lang1", 1000, 250}};
  auto out = AugmentWithClips(recs, 3.0, 20);
  REQUIRE(out.size() == 6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == recs[i]);
  CHECK(out[3].id == "long+clip3s");
  CHECK(out[3].path == "l.fea");
  CHECK(out[3].usable_frames() == 300);
  CHECK(out[4].usable_frames() == 200);  // whole 2 s utterance
  CHECK(out[5].usable_frames() == 250);
}

CorpusSpec SmallCorpus() {
  CorpusSpec s;
  s.train_utts = 12;
  s.dev_utts = 4;
  s.test_utts = 8;
  s.train_min_seconds = 1.0;
  s.train_max_seconds = 3.0;
  s.test_seconds = 4.0;
  s.test_levels = {1.0, 3.0};
  return s;
}

std::map<std::string, std::string> TreeContents(const std::string &root) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = Slurp(e.path().string());
  return out;
}

TEST_CASE("corpus generation is byte-identical for a fixed seed") {
  TempDir a("corpus-a"), b("corpus-b"), c("corpus-c");
  GenerateCorpus(SmallCorpus(), 42, a.str());
  GenerateCorpus(SmallCorpus(), 42, b.str());
  GenerateCorpus(SmallCorpus(), 43, c.str());
  auto ta = TreeContents(a.str()), tb = TreeContents(b.str()), tc = TreeContents(c.str());
  CHECK(ta.size() == 12 + 4 + 8 + 3 + 2 + 1);
  CHECK(ta == tb);
  CHECK(ta.at("feats/train/train-00000.fea") != tc.at("feats/train/train-00000.fea"));

  CorpusInfo info = ReadCorpusInfo(a.str());
  CHECK(info.seed == 42);
  CHECK(info.spec == SmallCorpus());
  CHECK(info.languages == std::vector<std::string>{"lang0", "lang1", "lang2", "lang3"});

  // Levels are prefix truncations of the same test files.
  auto test = ReadManifest(a / "test.jsonl");
  auto l1 = ReadManifest(a / "test_1s.jsonl");
  REQUIRE(l1.size() == test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    CHECK(l1[i].path == test[i].path);
    CHECK(l1[i].usable_frames() == 100);
    CHECK(test[i].frames == 400);
  }
  // Balanced labels.
  std::map<std::string, int> counts;
  for (const auto &r : ReadManifest(a / "train.jsonl")) ++counts[r.language];
  for (const auto &[lang, n] : counts) CHECK(n == 3);
}

TEST_CASE("synthetic languages are well formed") {
  SynthLangSpec spec;
  SynthLanguages langs = BuildLanguages(spec, 7);
  REQUIRE(langs.languages.size() == spec.n_langs);
  const std::size_t m = spec.n_states;
  for (const auto &l : langs.languages) {
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0, col = 0;
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(l.transitions[i * m + j] >= 0.0);
        row += l.transitions[i * m + j];
        col += l.transitions[j * m + i];
      }
      CHECK(std::abs(row - 1) <= 1e-9);
      // Symmetric, hence doubly stochastic.
      CHECK(std::abs(col - 1) <= 1e-9);
    }
  }
  SynthLanguages again = BuildLanguages(spec, 7);
  CHECK(again.state_means == langs.state_means);
  CHECK(again.languages[2].transitions == langs.languages[2].transitions);
}

// Accuracy of the frame-mean centroid oracle at each prefix length.
std::vector<double> OracleAccuracy(const SynthLangSpec &spec, const std::vector<double> &levels) {
  SynthLanguages langs = BuildLanguages(spec, 3);
  std::vector<Tensor<float>> train;
  std::vector<int> labels;
  for (std::size_t i = 0; i < 200; ++i) {
    KeyedStream rng(3, {1, i});
    labels.push_back(static_cast<int>(i % spec.n_langs));
    train.push_back(GenerateUtterance(langs, i % spec.n_langs, 1000, rng));
  }
  CentroidOracle oracle(train, labels, spec.n_langs);
  std::vector<double> acc(levels.size(), 0.0);
  const std::size_t n_test = 200;
  for (std::size_t i = 0; i < n_test; ++i) {
    KeyedStream rng(3, {2, i});
    Tensor<float> utt = GenerateUtterance(langs, i % spec.n_langs, 3000, rng);
    for (std::size_t l = 0; l < levels.size(); ++l)
      acc[l] += oracle.Classify(utt, static_cast<std::size_t>(levels[l] * 100)) ==
                static_cast<int>(i % spec.n_langs);
  }
  for (double &a : acc) a /= n_test;
  return acc;
}

TEST_CASE("centroid oracle: duration helps and the default corpus is learnable") {
  auto acc = OracleAccuracy(SynthLangSpec{}, {1, 3, 10, 30});
  MESSAGE("centroid accuracy 1/3/10/30 s: " << acc[0] << " " << acc[1] << " " << acc[2] << " "
                                            << acc[3]);
  for (std::size_t i = 1; i < acc.size(); ++i) CHECK(acc[i] >= acc[i - 1]);
  CHECK(acc[3] > 0.9);
}

TEST_CASE("centroid oracle is near chance without language offsets") {
  SynthLangSpec spec;
  spec.delta = 0.0;
  auto acc = OracleAccuracy(spec, {1});
  CHECK(acc[0] < 0.4);
}

TEST_CASE("batch assembly pads and masks") {
  const std::size_t k = 5, f = 4;
  std::vector<Utterance> data;
  for (std::size_t n : {15u, 10u}) {
    auto feats = std::make_shared<const Tensor<float>>(
        RandomTensor<float>({n * k + 2, f}, n));  // trailing frames dropped
    data.push_back(Utterance{"u" + std::to_string(n), static_cast<int>(n % 2), feats,
                             n * k + 2});
  }
  Batch b = AssembleBatch(data, {0, 1}, k);
  CHECK(b.segments.shape() == Shape{2, 15, k, f});
  CHECK(b.lengths == std::vector<std::size_t>{15, 10});
  CHECK(b.pad_masks[0] == AttentionMask::AllActive(15));
  CHECK(b.pad_masks[1].ToString() == "TTTTTTTTTTFFFFF");
  CHECK(b.labels == std::vector<int>{1, 0});
  CHECK(b.ids == std::vector<std::string>{"u15", "u10"});
  const std::size_t seg = k * f;
  for (std::size_t i = 10 * seg; i < 15 * seg; ++i) CHECK(b.segments[15 * seg + i] == 0.0f);
  CHECK(b.segments[15 * seg + 3] == (*data[1].feats)[3]);
}

TEST_CASE("batch order is a deterministic epoch-seeded permutation") {
  auto a = BatchOrder(23, 5, 9, 0), b = BatchOrder(23, 5, 9, 0), c = BatchOrder(23, 5, 9, 1);
  CHECK(a == b);
  CHECK(a != c);
  REQUIRE(a.size() == 5);
  CHECK(a.back().size() == 3);
  std::vector<std::size_t> all;
  for (const auto &chunk : a) all.insert(all.end(), chunk.begin(), chunk.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  CHECK_THROWS_AS(MakeBatches({}, 4, 5, 1, 0), DataError);
}

struct Fixture {
  TempDir dir{"ds"};
  ModelConfig config = testing::ToyConfig();
  std::vector<std::string> langs{"lang0", "lang1"};
  std::vector<ManifestRecord> records;

  Fixture() {
    fs::create_directories(dir / "feats");
    const std::size_t frames[] = {103, 40, 75, 12};
    for (std::size_t i = 0; i < 4; ++i) {
      const std::string id = "utt" + std::to_string(i);
      WriteFeatures(dir / ("feats/" + id + ".fea"),
                    RandomTensor<float>({frames[i], config.feat_dim}, 100 + i));
      records.push_back({id, "feats/" + id + ".fea", langs[i % 2], frames[i], std::nullopt});
    }
    WriteManifest(dir / "m.jsonl", records);
  }
};

TEST_CASE("dataset loading") {
  Fixture fx;
  auto data = LoadDataset(fx.dir / "m.jsonl", fx.langs, fx.config.feat_dim, fx.config.seg_frames);
  REQUIRE(data.size() == 4);
  CHECK(data[2].label == 0);
  CHECK(data[1].frames == 40);

  auto recs = fx.records;
  recs[0].language = "klingon";
  CHECK_THROWS_AS(LoadDataset(recs, fx.dir.str(), fx.langs, fx.config.feat_dim, 5), DataError);
  recs = fx.records;
  recs[1].frames = 41;
  CHECK_THROWS_AS(LoadDataset(recs, fx.dir.str(), fx.langs, fx.config.feat_dim, 5), DataError);
  CHECK_THROWS_AS(LoadDataset(fx.records, fx.dir.str(), fx.langs, 5, 5), DataError);
  // Shorter than one segment.
  CHECK_THROWS_AS(LoadDataset(fx.records, fx.dir.str(), fx.langs, fx.config.feat_dim, 13),
                  DataError);
}

TEST_CASE("clip record forward equals the fixed clip mask on the parent") {
  Fixture fx;
  const ModelConfig &c = fx.config;
  auto params = InitParams<double>(c, 5);
  // With K=5 a 1 s clip is 5 segments.
  auto recs = AugmentWithClips(fx.records, 1.0, c.seg_frames);
  auto data = LoadDataset(recs, fx.dir.str(), fx.langs, c.feat_dim, c.seg_frames);
  REQUIRE(data.size() == 8);
  for (std::size_t i = 0; i < 4; ++i) {
    const Utterance &parent = data[i], &clip = data[4 + i];
    CHECK(clip.feats == parent.feats);  // shared, not copied
    const std::size_t t_parent = parent.frames / c.seg_frames;
    const std::size_t t_clip = clip.frames / c.seg_frames;
    CHECK(t_clip == std::min<std::size_t>(5, t_parent));
    Tensor<double> parent_feats = parent.feats->Cast<double>();
    Tensor<double> clip_feats({clip.frames, c.feat_dim});
    std::copy(parent_feats.data(), parent_feats.data() + clip_feats.size(), clip_feats.data());
    Tensor<double> via_mask = Forward(params, c, parent_feats, FixedClipMask(t_parent, 5));
    Tensor<double> via_record = Forward(params, c, clip_feats, AttentionMask::AllActive(t_clip));
    CHECK(MaxAbsDiff(via_mask, via_record) <= 1e-10);
  }
}

TEST_CASE("batched logits match solo forward for every utterance") {
  Fixture fx;
  const ModelConfig &c = fx.config;
  auto params = InitParams<float>(c, 6);
  auto data = LoadDataset(fx.dir / "m.jsonl", fx.langs, c.feat_dim, c.seg_frames);
  Batch b = AssembleBatch(data, {0, 1, 2, 3}, c.seg_frames);
  Tape<float> tape;
  BoundParams bp = BindParams(tape, params, false);
  auto flat = FlattenMasks(b.pad_masks);
  Var emb = XvectorEmbedPadded(tape, bp, c, b.segments, b.lengths);
  Tensor<float> logits = tape.value(LogitsFromEmbeddings(tape, bp, c, emb, flat));
  for (std::size_t i = 0; i < 4; ++i) {
    Tensor<float> solo =
        Forward(params, c, *data[i].feats, AttentionMask::AllActive(b.lengths[i]));
    for (std::size_t q = 0; q < c.n_langs; ++q) CHECK(std::abs(logits(i, q) - solo[q]) <= 1e-5f);
  }
}

}  // namespace
}  // namespace dlid
