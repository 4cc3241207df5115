// include/dlid/run-config.h

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

#ifndef DLID_RUN_CONFIG_H_
#define DLID_RUN_CONFIG_H_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlid/metrics.h"
#include "dlid/model.h"
#include "dlid/synth.h"
#include "dlid/trainer.h"

namespace dlid {

struct EvalConfig {
  std::vector<double> durations{1.0, 3.0, 10.0, 30.0};  // seconds
  std::size_t batch_size = 64;
  // Crop a random window instead of the prefix.
  bool random_crop = false;
  CavgOptions cavg;
  friend bool operator==(const EvalConfig &a, const EvalConfig &b) {
    return a.durations == b.durations && a.batch_size == b.batch_size &&
           a.random_crop == b.random_crop && a.cavg.normalized == b.cavg.normalized &&
           a.cavg.detection == b.cavg.detection;
  }
};

struct AblateConfig {
  std::size_t seeds = 5;
  // Random-location mask lengths trained in addition to the presets.
  std::vector<double> mask_seconds{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  bool mask_grid = true;
  friend bool operator==(const AblateConfig &, const AblateConfig &) = default;
};

struct PathsConfig {
  std::string data_dir = "data";
  std::string out_dir = "runs";
  friend bool operator==(const PathsConfig &, const PathsConfig &) = default;
};

/// Everything a run needs, as one JSON document.  Unknown keys are errors.
struct RunConfig {
  std::uint64_t seed = 1;
  ModelConfig model;
  TrainConfig train;
  CorpusSpec data;
  EvalConfig eval;
  AblateConfig ablate;
  PathsConfig paths;

  // Cross-module checks (feature dimension, language count, durations).
  void Validate() const;
  friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

nlohmann::json ToJson(const RunConfig &config);
RunConfig RunConfigFromJson(const nlohmann::json &j);
RunConfig LoadRunConfig(const std::string &path);
std::string FormatRunConfig(const RunConfig &config);

// --seed flag, then DLID_SEED, then the config's seed.
std::uint64_t ResolveSeed(const RunConfig &config, std::optional<std::uint64_t> flag);

}  // namespace dlid

#endif  // DLID_RUN_CONFIG_H_
