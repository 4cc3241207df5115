// src/run-config.cc

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

#include "dlid/run-config.h"

#include <cstdlib>

#include "dlid/binary-io.h"
#include "dlid/errors.h"
#include "dlid/json-fields.h"

namespace dlid {

void RunConfig::Validate() const {
  model.Validate();
  train.Validate();
  data.Validate();
  if (model.feat_dim != data.lang.feat_dim)
    throw ConfigError("model.feat_dim: " + std::to_string(model.feat_dim) +
                      " does not match data.lang.feat_dim " + std::to_string(data.lang.feat_dim));
  if (model.n_langs != data.lang.n_langs)
    throw ConfigError("model.n_langs: " + std::to_string(model.n_langs) +
                      " does not match data.lang.n_langs " + std::to_string(data.lang.n_langs));
  if (eval.durations.empty()) throw ConfigError("eval.durations: must not be empty");
  for (double d : eval.durations)
    if (!(d > 0.0)) throw ConfigError("eval.durations: levels must be positive");
  if (eval.batch_size < 1) throw ConfigError("eval.batch_size: must be >= 1");
  if (ablate.seeds < 1) throw ConfigError("ablate.seeds: must be >= 1");
  for (double s : ablate.mask_seconds)
    if (!(s > 0.0)) throw ConfigError("ablate.mask_seconds: lengths must be positive");
}

nlohmann::json ToJson(const RunConfig &c) {
  nlohmann::json eval = {{"durations", c.eval.durations},
                         {"batch_size", c.eval.batch_size},
                         {"random_crop", c.eval.random_crop},
                         {"cavg_normalized", c.eval.cavg.normalized},
                         {"cavg_detection", c.eval.cavg.detection}};
  nlohmann::json ablate = {{"seeds", c.ablate.seeds},
                           {"mask_seconds", c.ablate.mask_seconds},
                           {"mask_grid", c.ablate.mask_grid}};
  nlohmann::json paths = {{"data_dir", c.paths.data_dir}, {"out_dir", c.paths.out_dir}};
  return {{"seed", c.seed},     {"model", ToJson(c.model)}, {"train", ToJson(c.train)},
          {"data", ToJson(c.data)}, {"eval", eval},          {"ablate", ablate},
          {"paths", paths}};
}

RunConfig RunConfigFromJson(const nlohmann::json &j) {
  RunConfig c;
  JsonFields f(j, "");
  f.Get("seed", c.seed);
  f.Nested("model", [&](const nlohmann::json &v, const std::string &p) {
    c.model = ModelConfigFromJson(v, p);
  });
  f.Nested("train", [&](const nlohmann::json &v, const std::string &p) {
    c.train = TrainConfigFromJson(v, p);
  });
  f.Nested("data", [&](const nlohmann::json &v, const std::string &p) {
    c.data = CorpusSpecFromJson(v, p);
  });
  f.Nested("eval", [&](const nlohmann::json &v, const std::string &p) {
    JsonFields e(v, p);
    e.Get("durations", c.eval.durations);
    e.Get("batch_size", c.eval.batch_size);
    e.Get("random_crop", c.eval.random_crop);
    e.Get("cavg_normalized", c.eval.cavg.normalized);
    e.Get("cavg_detection", c.eval.cavg.detection);
    e.Finish();
  });
  f.Nested("ablate", [&](const nlohmann::json &v, const std::string &p) {
    JsonFields a(v, p);
    a.Get("seeds", c.ablate.seeds);
    a.Get("mask_seconds", c.ablate.mask_seconds);
    a.Get("mask_grid", c.ablate.mask_grid);
    a.Finish();
  });
  f.Nested("paths", [&](const nlohmann::json &v, const std::string &p) {
    JsonFields a(v, p);
    a.Get("data_dir", c.paths.data_dir);
    a.Get("out_dir", c.paths.out_dir);
    a.Finish();
  });
  f.Finish();
  c.Validate();
  return c;
}

RunConfig LoadRunConfig(const std::string &path) {
  std::string text;
  try {
    text = ReadFileBytes(path);
  } catch (const DataError &e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
  return RunConfigFromJson(j);
}

std::string FormatRunConfig(const RunConfig &config) { return ToJson(config).dump(2) + "\n"; }

std::uint64_t ResolveSeed(const RunConfig &config, std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char *env = std::getenv("DLID_SEED"); env && *env) {
    char *end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("DLID_SEED: not an integer: ") + env);
    return v;
  }
  return config.seed;
}

}  // namespace dlid
