// tests/io-test.cc

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

#include <cstdlib>
#include <cstring>
#include <fstream>

#include "dlid/checkpoint.h"
#include "dlid/errors.h"
#include "dlid/evaluate.h"
#include "dlid/run-config.h"
#include "test-util.h"

namespace dlid {
namespace {

using testing::RandomTensor;
using testing::TempDir;
using testing::ToyConfig;

const std::string kDeskConfig = std::string(DLID_SOURCE_DIR) + "/configs/desk.json";
const std::string kPaperConfig = std::string(DLID_SOURCE_DIR) + "/configs/paper.json";

TEST_CASE("checkpoint round trip is bit-exact") {
  TempDir dir("ckpt");
  const ModelConfig c = ToyConfig();
  auto params = InitParams<float>(c, 12);
  params.at("head0.bias")[0] = -0.0f;
  WriteCheckpoint(dir / "a.ckpt", c, params);
  Checkpoint back = ReadCheckpoint(dir / "a.ckpt");
  CHECK(back.config == c);
  REQUIRE(back.params.size() == params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto &[na, ta] = params.entries()[i];
    const auto &[nb, tb] = back.params.entries()[i];
    CHECK(na == nb);
    CHECK(ta.shape() == tb.shape());
    CHECK(std::memcmp(ta.data(), tb.data(), ta.size() * sizeof(float)) == 0);
  }
  CHECK(SerializeCheckpoint(back.config, back.params) == SerializeCheckpoint(c, params));
}

TEST_CASE("checkpoint corruption is reported") {
  const ModelConfig c = ToyConfig();
  const std::string good = SerializeCheckpoint(c, InitParams<float>(c, 1));
  std::string bad = good;
  bad[1] = 'X';
  CHECK_THROWS_WITH_AS(ParseCheckpoint(bad), doctest::Contains("bad magic"), DataError);
  bad = good;
  bad[4] = 9;
  CHECK_THROWS_AS(ParseCheckpoint(bad), DataError);
  CHECK_THROWS_AS(ParseCheckpoint(good + "x"), DataError);
  for (std::size_t cut : {0ul, 3ul, 11ul, good.size() / 2, good.size() - 1})
    CHECK_THROWS_AS(ParseCheckpoint(good.substr(0, cut)), DataError);
  CHECK_THROWS_AS(ReadCheckpoint("/nonexistent/x.ckpt"), DataError);
}

TEST_CASE("run config files load and round trip") {
  for (const std::string &path : {kDeskConfig, kPaperConfig}) {
    CAPTURE(path);
    RunConfig rc = LoadRunConfig(path);
    CHECK(RunConfigFromJson(ToJson(rc)) == rc);
    CHECK(RunConfigFromJson(nlohmann::json::parse(FormatRunConfig(rc))) == rc);
  }
  RunConfig paper = LoadRunConfig(kPaperConfig);
  CHECK(paper.model == ModelConfig{});
  CHECK(paper.train.base_lr == 1e-4);
  CHECK(paper.train.warmup_steps == 24000);
  CHECK(paper.train.weights.alpha == 0.33);
  CHECK(paper.train.weights.temp == 2.0);
}

TEST_CASE("run config rejects unknown keys and inconsistencies") {
  nlohmann::json j = ToJson(RunConfig{});
  j["model"]["dropout"] = 0.1;
  CHECK_THROWS_AS(RunConfigFromJson(j), ConfigError);
  j = ToJson(RunConfig{});
  j["trainer"] = nlohmann::json::object();
  CHECK_THROWS_AS(RunConfigFromJson(j), ConfigError);
  RunConfig rc = LoadRunConfig(kDeskConfig);
  rc.data.lang.feat_dim = rc.model.feat_dim + 1;
  CHECK_THROWS_AS(rc.Validate(), ConfigError);
  TempDir dir("cfg");
  std::ofstream(dir / "broken.json") << "{ \"seed\": ";
  CHECK_THROWS_AS(LoadRunConfig(dir / "broken.json"), ConfigError);
}

TEST_CASE("seed precedence: flag, environment, config") {
  RunConfig rc;
  rc.seed = 5;
  unsetenv("DLID_SEED");
  CHECK(ResolveSeed(rc, std::nullopt) == 5);
  setenv("DLID_SEED", "77", 1);
  CHECK(ResolveSeed(rc, std::nullopt) == 77);
  CHECK(ResolveSeed(rc, 9) == 9);
  setenv("DLID_SEED", "seven", 1);
  CHECK_THROWS_AS(ResolveSeed(rc, std::nullopt), ConfigError);
  unsetenv("DLID_SEED");
}

std::vector<Utterance> EvalData(const ModelConfig &c) {
  std::vector<Utterance> data;
  const std::size_t frames[] = {400, 130, 77, 260, 300};
  for (std::size_t i = 0; i < 5; ++i) {
    auto f = std::make_shared<const Tensor<float>>(RandomTensor<float>({frames[i], c.feat_dim}, i));
    data.push_back(Utterance{"e" + std::to_string(i), static_cast<int>(i % 2), f, frames[i]});
  }
  return data;
}

TEST_CASE("level evaluation scores prefixes") {
  const ModelConfig c = ToyConfig();  // K = 5: 1 s = 25 frames
  CHECK(LevelFrames(3.0, 20) == 300);
  CHECK(LevelFrames(2.0, 5) == 50);
  auto params = InitParams<float>(c, 3);
  auto data = EvalData(c);
  const std::vector<std::string> langs{"a", "b"};
  EvalConfig cfg;
  cfg.batch_size = 2;
  std::vector<std::string> short_ids;
  ScoreTable t = EvaluateLevel(params, c, data, langs, 10.0, cfg, 1, &short_ids);
  CHECK(short_ids == std::vector<std::string>{"e1", "e2"});
  REQUIRE(t.rows.size() == 5);
  CHECK(t.languages == langs);
  t.Validate();
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(t.rows[i].id == data[i].id);
    CHECK(t.rows[i].label == data[i].label);
    const std::size_t use = std::min<std::size_t>(250, data[i].frames) / 5 * 5;
    Tensor<float> prefix({use, c.feat_dim});
    std::copy(data[i].feats->data(), data[i].feats->data() + prefix.size(), prefix.data());
    auto expect = LogPosteriors(Forward(params, c, prefix, AttentionMask::AllActive(use / 5)).values());
    for (std::size_t q = 0; q < 2; ++q)
      CHECK(t.rows[i].log_posteriors[q] == doctest::Approx(expect[q]).epsilon(1e-5));
  }
  cfg.batch_size = 64;
  ScoreTable again = EvaluateLevel(params, c, data, langs, 10.0, cfg, 1);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t q = 0; q < 2; ++q)
      CHECK(again.rows[i].log_posteriors[q] ==
            doctest::Approx(t.rows[i].log_posteriors[q]).epsilon(1e-5));
}

TEST_CASE("random crops are keyed and in range") {
  const ModelConfig c = ToyConfig();
  auto params = InitParams<float>(c, 3);
  auto data = EvalData(c);
  EvalConfig cfg;
  cfg.random_crop = true;
  ScoreTable a = EvaluateLevel(params, c, data, {"a", "b"}, 2.0, cfg, 4);
  ScoreTable b = EvaluateLevel(params, c, data, {"a", "b"}, 2.0, cfg, 4);
  CHECK(FormatScoresCsv(a) == FormatScoresCsv(b));
  cfg.random_crop = false;
  ScoreTable prefix = EvaluateLevel(params, c, data, {"a", "b"}, 2.0, cfg, 4);
  CHECK(FormatScoresCsv(a) != FormatScoresCsv(prefix));
}

TEST_CASE("log posteriors and level metrics") {
  auto lp = LogPosteriors(std::vector<float>{1.0f, 2.0f, 3.0f});
  double s = 0;
  for (double v : lp) s += std::exp(v);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lp[2] - lp[1] == doctest::Approx(1.0).epsilon(1e-7));

  ScoreTable t{{"a", "b"}, {}};
  t.rows.push_back({"x", 0, LogPosteriors(std::vector<float>{2, 0})});
  t.rows.push_back({"y", 1, LogPosteriors(std::vector<float>{0, 2})});
  t.rows.push_back({"z", 1, LogPosteriors(std::vector<float>{1, 0})});
  LevelMetrics m = ComputeMetrics(t);
  CHECK(m.accuracy == doctest::Approx(2.0 / 3));
  CHECK(m.cavg == CAvg(t));
  CHECK(m.eer == Eer(t));
}

}  // namespace
}  // namespace dlid
