// src/evaluate.cc

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

#include "dlid/evaluate.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "dlid/keyed-rng.h"

namespace dlid {

std::size_t LevelFrames(double seconds, std::size_t seg_frames) {
  return ClipSpec::FromSeconds(seconds, ClipLocation::kFixed).length_segments * seg_frames;
}

std::vector<double> LogPosteriors(std::span<const float> logits) {
  double m = logits[0];
  for (float v : logits) m = std::max(m, static_cast<double>(v));
  double sum = 0.0;
  for (float v : logits) sum += std::exp(v - m);
  const double lse = m + std::log(sum);
  std::vector<double> out;
  for (float v : logits) out.push_back(v - lse);
  return out;
}

ScoreTable EvaluateLevel(const ModelParams<float> &params, const ModelConfig &model,
                         const std::vector<Utterance> &data,
                         const std::vector<std::string> &languages, double seconds,
                         const EvalConfig &config, std::uint64_t seed,
                         std::vector<std::string> *short_ids) {
  const std::size_t want = LevelFrames(seconds, model.seg_frames);
  std::vector<Utterance> cut;
  cut.reserve(data.size());
  for (const Utterance &u : data) {
    Utterance c = u;
    if (u.frames < want) {
      if (short_ids) short_ids->push_back(u.id);
    } else if (config.random_crop && u.frames > want) {
      KeyedStream rng(seed, {HashString("crop"), HashString(u.id), LevelFrames(seconds, 1)});
      std::uniform_int_distribution<std::size_t> start(0, u.frames - want);
      const std::size_t s = start(rng), f = u.feats->dim(1);
      c.feats = std::make_shared<const Tensor<float>>(
          Shape{want, f},
          std::vector<float>(u.feats->data() + s * f, u.feats->data() + (s + want) * f));
      c.frames = want;
    } else {
      c.frames = want;
    }
    cut.push_back(std::move(c));
  }

  ScoreTable table;
  table.languages = languages;
  for (std::size_t first = 0; first < cut.size(); first += config.batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = first; i < std::min(cut.size(), first + config.batch_size); ++i)
      idx.push_back(i);
    Batch batch = AssembleBatch(cut, idx, model.seg_frames);
    Tape<float> tape;
    BoundParams bound = BindParams(tape, params, false);
    Var emb = XvectorEmbedPadded(tape, bound, model, batch.segments, batch.lengths);
    const Tensor<float> &logits =
        tape.value(LogitsFromEmbeddings(tape, bound, model, emb, FlattenMasks(batch.pad_masks)));
    const std::size_t q = logits.dim(1);
    for (std::size_t b = 0; b < batch.size(); ++b)
      table.rows.push_back(ScoreRow{batch.ids[b], batch.labels[b],
                                    LogPosteriors(logits.values().subspan(b * q, q))});
  }
  return table;
}

LevelMetrics ComputeMetrics(const ScoreTable &table, const CavgOptions &options) {
  return LevelMetrics{Accuracy(table), Eer(table), CAvg(table, {}, options)};
}

}  // namespace dlid
