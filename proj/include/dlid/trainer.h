// include/dlid/trainer.h

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

#ifndef DLID_TRAINER_H_
#define DLID_TRAINER_H_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dlid/dataset.h"
#include "dlid/losses.h"
#include "dlid/masking.h"
#include "dlid/model.h"
#include "dlid/optim.h"

namespace dlid {

enum class SystemMode { kXsa, kXsaAug, kDualNoKd, kDualFixed, kDualRandom };

// "xsa", "xsa-aug", "dual-nokd", "dual-fixed", "dual-random".  Underscores are
// accepted in place of dashes.  Throws ConfigError otherwise.
SystemMode ParseSystemMode(const std::string &name);
std::string SystemModeName(SystemMode mode);
std::vector<SystemMode> AllSystemModes();
bool IsDualMode(SystemMode mode);

struct TrainConfig {
  SystemMode mode = SystemMode::kDualRandom;
  std::size_t epochs = 20;
  std::size_t batch_size_single = 32;
  std::size_t batch_size_dual = 16;
  // Dual-mode weights; single-mode systems use alpha = 1 and dual-nokd
  // alpha = beta = 0.5 regardless (see EffectiveWeights).
  LossWeights weights;
  double clip_seconds = 3.0;
  double aug_clip_seconds = 3.0;  // xsa-aug supplement clips
  double base_lr = 1e-4;
  std::size_t warmup_steps = 24000;
  // When > 0, warmup = round(warmup_fraction * total_steps) instead.
  double warmup_fraction = 0.0;
  bool detach_teacher = false;
  KdDirection kd_direction = KdDirection::kShortWeighted;
  // Draw a fresh random clip every step instead of once per epoch.
  bool clip_per_step = false;

  void Validate() const;
  std::size_t batch_size() const;
  LossWeights EffectiveWeights() const;
  ClipSpec Clip() const;
  ScheduleConfig Schedule(std::size_t total_steps) const;
  friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

nlohmann::json ToJson(const TrainConfig &config);
TrainConfig TrainConfigFromJson(const nlohmann::json &j, const std::string &context = "train");

// Clip masks for a batch.  Random clips are keyed by (seed, epoch, utterance
// id) and additionally by step when clip_per_step is set.
std::vector<AttentionMask> ClipMasks(const Batch &batch, const TrainConfig &config,
                                     std::uint64_t seed, std::uint64_t epoch, std::uint64_t step);

struct StepLosses {
  double loss_full = 0.0;
  std::optional<double> loss_short;
  std::optional<double> loss_kd;
  double loss_total = 0.0;
};

/// Graph of one training step over a bound parameter set.  Both modes read
/// the same Parameter nodes, so the shared weights are the same tensors.
struct DualGraph {
  Var loss;  // weighted objective
  Var full_logits;
  std::optional<Var> short_logits;
  StepLosses losses;
};

DualGraph BuildDualGraph(Tape<float> &tape, const BoundParams &params, const ModelConfig &model,
                         const TrainConfig &config, const Batch &batch,
                         const std::vector<AttentionMask> &clip_masks);

struct StepResult {
  StepLosses losses;
  double lr = 0.0;
};

// Forward both modes, one backward through the combined loss, one Adam
// update.  Single-mode systems skip the short-mode pass.
StepResult DualModeStep(const Batch &batch, const std::vector<AttentionMask> &clip_masks,
                        ModelParams<float> &params, Adam<float> &adam, const ModelConfig &model,
                        const TrainConfig &config, double lr);

// "step\tlr\tloss_full\tloss_short\tloss_kd\tloss_total"
std::string TrainLogHeader();
// Absent losses print as "-".
std::string TrainLogLine(std::size_t step, const StepResult &r);

struct TrainOutcome {
  ModelParams<float> params;
  std::size_t steps = 0;
};

/// Full training run from InitParams(model, seed).  For xsa-aug the training
/// set is supplemented with first-clip copies.  Writes one log line per step
/// to `log` when non-null.  Throws NumericError naming the step on a
/// non-finite loss or gradient.
TrainOutcome Train(const std::vector<Utterance> &train, const ModelConfig &model,
                   const TrainConfig &config, std::uint64_t seed, std::ostream *log = nullptr);

}  // namespace dlid

#endif  // DLID_TRAINER_H_
