// include/dlid/evaluate.h

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

#ifndef DLID_EVALUATE_H_
#define DLID_EVALUATE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dlid/dataset.h"
#include "dlid/metrics.h"
#include "dlid/model.h"
#include "dlid/run-config.h"

namespace dlid {

// Frames covered by a duration level: seconds * 5 segments of seg_frames.
std::size_t LevelFrames(double seconds, std::size_t seg_frames);

/// Scores every utterance cut to `seconds` (prefix, or a random window when
/// config.random_crop) with an all-true mask.  Utterances shorter than the
/// level are scored whole and their ids appended to *short_ids.
ScoreTable EvaluateLevel(const ModelParams<float> &params, const ModelConfig &model,
                         const std::vector<Utterance> &data,
                         const std::vector<std::string> &languages, double seconds,
                         const EvalConfig &config, std::uint64_t seed,
                         std::vector<std::string> *short_ids = nullptr);

// Log-softmax at temperature 1, in double.
std::vector<double> LogPosteriors(std::span<const float> logits);

struct LevelMetrics {
  double accuracy = 0.0;
  double eer = 0.0;
  double cavg = 0.0;
};

LevelMetrics ComputeMetrics(const ScoreTable &table, const CavgOptions &options = {});

}  // namespace dlid

#endif  // DLID_EVALUATE_H_
