// src/trainer.cc

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

#include "dlid/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dlid/errors.h"
#include "dlid/json-fields.h"

namespace dlid {

namespace {

const char *const kModeNames[] = {"xsa", "xsa-aug", "dual-nokd", "dual-fixed", "dual-random"};

}  // namespace

SystemMode ParseSystemMode(const std::string &name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  for (int i = 0; i < 5; ++i)
    if (n == kModeNames[i]) return static_cast<SystemMode>(i);
  throw ConfigError("unknown system mode '" + name +
                    "' (expected xsa, xsa-aug, dual-nokd, dual-fixed or dual-random)");
}

std::string SystemModeName(SystemMode mode) { return kModeNames[static_cast<int>(mode)]; }

std::vector<SystemMode> AllSystemModes() {
  return {SystemMode::kXsa, SystemMode::kXsaAug, SystemMode::kDualNoKd, SystemMode::kDualFixed,
          SystemMode::kDualRandom};
}

bool IsDualMode(SystemMode mode) { return mode != SystemMode::kXsa && mode != SystemMode::kXsaAug; }

void TrainConfig::Validate() const {
  auto bad = [](const std::string &field, const std::string &msg) {
    throw ConfigError("train." + field + ": " + msg);
  };
  if (epochs < 1) bad("epochs", "must be >= 1");
  if (batch_size_single < 1) bad("batch_size_single", "must be >= 1");
  if (batch_size_dual < 1) bad("batch_size_dual", "must be >= 1");
  try {
    weights.Validate();
  } catch (const std::invalid_argument &e) {
    bad("weights", e.what());
  }
  if (!(clip_seconds > 0.0)) bad("clip_seconds", "must be > 0");
  if (!(aug_clip_seconds > 0.0)) bad("aug_clip_seconds", "must be > 0");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) bad("base_lr", "must be finite and > 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) bad("warmup_fraction", "must be in [0, 1)");
  try {
    ClipSpec::FromSeconds(clip_seconds, ClipLocation::kRandom);
  } catch (const std::invalid_argument &e) {
    bad("clip_seconds", e.what());
  }
}

std::size_t TrainConfig::batch_size() const {
  return IsDualMode(mode) ? batch_size_dual : batch_size_single;
}

LossWeights TrainConfig::EffectiveWeights() const {
  switch (mode) {
    case SystemMode::kXsa:
    case SystemMode::kXsaAug:
      return LossWeights{1.0, 0.0, weights.temp};
    case SystemMode::kDualNoKd:
      return LossWeights{0.5, 0.5, weights.temp};
    default:
      return weights;
  }
}

ClipSpec TrainConfig::Clip() const {
  return ClipSpec::FromSeconds(
      clip_seconds, mode == SystemMode::kDualFixed ? ClipLocation::kFixed : ClipLocation::kRandom);
}

ScheduleConfig TrainConfig::Schedule(std::size_t total_steps) const {
  ScheduleConfig s;
  s.base_lr = base_lr;
  s.total_steps = total_steps;
  s.warmup_steps = warmup_fraction > 0.0
                       ? static_cast<std::size_t>(std::lround(warmup_fraction * total_steps))
                       : warmup_steps;
  return s;
}

nlohmann::json ToJson(const TrainConfig &c) {
  return {{"mode", SystemModeName(c.mode)},
          {"epochs", c.epochs},
          {"batch_size_single", c.batch_size_single},
          {"batch_size_dual", c.batch_size_dual},
          {"alpha", c.weights.alpha},
          {"beta", c.weights.beta},
          {"temp", c.weights.temp},
          {"clip_seconds", c.clip_seconds},
          {"aug_clip_seconds", c.aug_clip_seconds},
          {"base_lr", c.base_lr},
          {"warmup_steps", c.warmup_steps},
          {"warmup_fraction", c.warmup_fraction},
          {"detach_teacher", c.detach_teacher},
          {"kd_direction", c.kd_direction == KdDirection::kShortWeighted ? "short" : "full"},
          {"clip_per_step", c.clip_per_step}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json &j, const std::string &context) {
  TrainConfig c;
  JsonFields f(j, context);
  std::string mode = SystemModeName(c.mode);
  f.Get("mode", mode);
  c.mode = ParseSystemMode(mode);
  f.Get("epochs", c.epochs);
  f.Get("batch_size_single", c.batch_size_single);
  f.Get("batch_size_dual", c.batch_size_dual);
  f.Get("alpha", c.weights.alpha);
  f.Get("beta", c.weights.beta);
  f.Get("temp", c.weights.temp);
  f.Get("clip_seconds", c.clip_seconds);
  f.Get("aug_clip_seconds", c.aug_clip_seconds);
  f.Get("base_lr", c.base_lr);
  f.Get("warmup_steps", c.warmup_steps);
  f.Get("warmup_fraction", c.warmup_fraction);
  f.Get("detach_teacher", c.detach_teacher);
  std::string dir = "short";
  f.Get("kd_direction", dir);
  if (dir == "short")
    c.kd_direction = KdDirection::kShortWeighted;
  else if (dir == "full")
    c.kd_direction = KdDirection::kFullWeighted;
  else
    throw ConfigError(f.Path("kd_direction") + ": expected \"short\" or \"full\"");
  f.Get("clip_per_step", c.clip_per_step);
  f.Finish();
  c.Validate();
  return c;
}

std::vector<AttentionMask> ClipMasks(const Batch &batch, const TrainConfig &config,
                                     std::uint64_t seed, std::uint64_t epoch, std::uint64_t step) {
  const ClipSpec clip = config.Clip();
  std::vector<AttentionMask> out;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (clip.location == ClipLocation::kFixed) {
      out.push_back(FixedClipMask(batch.lengths[b], clip.length_segments, batch.t_max()));
    } else {
      KeyedStream rng = config.clip_per_step
                            ? KeyedStream(seed, {HashString("clip"), epoch, HashString(batch.ids[b]), step})
                            : KeyedStream(seed, {HashString("clip"), epoch, HashString(batch.ids[b])});
      out.push_back(RandomClipMask(batch.lengths[b], clip.length_segments, rng, batch.t_max()));
    }
  }
  return out;
}

DualGraph BuildDualGraph(Tape<float> &tape, const BoundParams &params, const ModelConfig &model,
                         const TrainConfig &config, const Batch &batch,
                         const std::vector<AttentionMask> &clip_masks) {
  const LossWeights w = config.EffectiveWeights();
  const std::vector<std::uint8_t> pad = FlattenMasks(batch.pad_masks);
  // Segment embeddings do not depend on the mask, so both modes share them.
  Var emb = XvectorEmbedPadded(tape, params, model, batch.segments, batch.lengths);
  DualGraph g;
  g.full_logits = LogitsFromEmbeddings(tape, params, model, emb, pad);
  Var ce_full = CrossEntropy(tape, g.full_logits, batch.labels);
  g.losses.loss_full = tape.value(ce_full)[0];
  if (!IsDualMode(config.mode)) {
    g.loss = ce_full;
    g.losses.loss_total = g.losses.loss_full;
    return g;
  }
  if (clip_masks.size() != batch.size())
    throw std::invalid_argument("BuildDualGraph: need one clip mask per utterance");
  std::vector<AttentionMask> combined;
  for (std::size_t b = 0; b < batch.size(); ++b)
    combined.push_back(Combine(batch.pad_masks[b], clip_masks[b]));
  g.short_logits = LogitsFromEmbeddings(tape, params, model, emb, FlattenMasks(combined));
  Var ce_short = CrossEntropy(tape, *g.short_logits, batch.labels);
  Var kd = KdLoss(tape, g.full_logits, *g.short_logits, static_cast<float>(w.temp),
                  KdOptions{config.kd_direction, config.detach_teacher});
  g.loss = DualLoss(tape, ce_full, ce_short, kd, w);
  g.losses.loss_short = tape.value(ce_short)[0];
  g.losses.loss_kd = tape.value(kd)[0];
  g.losses.loss_total = DualLossValue(g.losses.loss_full, *g.losses.loss_short,
                                      *g.losses.loss_kd, w);
  return g;
}

StepResult DualModeStep(const Batch &batch, const std::vector<AttentionMask> &clip_masks,
                        ModelParams<float> &params, Adam<float> &adam, const ModelConfig &model,
                        const TrainConfig &config, double lr) {
  Tape<float> tape;
  BoundParams bound = BindParams(tape, params, true);
  DualGraph g = BuildDualGraph(tape, bound, model, config, batch, clip_masks);
  if (!std::isfinite(g.losses.loss_total)) throw NumericError("non-finite loss");
  tape.Backward(g.loss);
  std::vector<Tensor<float>> grads;
  grads.reserve(params.size());
  for (const auto &[name, t] : params.entries()) grads.push_back(tape.grad(bound[name]));
  adam.Step(params, grads, lr);
  return StepResult{g.losses, lr};
}

std::string TrainLogHeader() { return "step\tlr\tloss_full\tloss_short\tloss_kd\tloss_total"; }

std::string TrainLogLine(std::size_t step, const StepResult &r) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double> &v) { return v ? num(*v) : std::string("-"); };
  return std::to_string(step) + "\t" + num(r.lr) + "\t" + num(r.losses.loss_full) + "\t" +
         opt(r.losses.loss_short) + "\t" + opt(r.losses.loss_kd) + "\t" + num(r.losses.loss_total);
}

TrainOutcome Train(const std::vector<Utterance> &train, const ModelConfig &model,
                   const TrainConfig &config, std::uint64_t seed, std::ostream *log) {
  model.Validate();
  config.Validate();
  const std::vector<Utterance> data =
      config.mode == SystemMode::kXsaAug
          ? AugmentWithClips(train, config.aug_clip_seconds, model.seg_frames)
          : train;
  if (data.empty()) throw DataError("empty manifest");
  const std::size_t bs = config.batch_size();
  const std::size_t per_epoch = (data.size() + bs - 1) / bs;
  const ScheduleConfig schedule = config.Schedule(per_epoch * config.epochs);

  TrainOutcome out{InitParams<float>(model, seed), 0};
  Adam<float> adam(out.params);
  if (log) *log << TrainLogHeader() << '\n';
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto &idx : BatchOrder(data.size(), bs, seed, epoch)) {
      const std::size_t step = out.steps + 1;
      Batch batch = AssembleBatch(data, idx, model.seg_frames);
      std::vector<AttentionMask> clips;
      if (IsDualMode(config.mode)) clips = ClipMasks(batch, config, seed, epoch, step);
      StepResult r;
      try {
        r = DualModeStep(batch, clips, out.params, adam, model, config, LrAt(step, schedule));
      } catch (const NumericError &e) {
        throw NumericError("step " + std::to_string(step) + ": " + e.what());
      }
      out.steps = step;
      if (log) *log << TrainLogLine(step, r) << '\n';
    }
  }
  return out;
}

}  // namespace dlid
