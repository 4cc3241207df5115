// include/dlid/ablation.h

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

#ifndef DLID_ABLATION_H_
#define DLID_ABLATION_H_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dlid/dataset.h"
#include "dlid/evaluate.h"
#include "dlid/run-config.h"
#include "dlid/trainer.h"

namespace dlid {

/// One trained system of the report.
struct AblationCell {
  std::string name;  // "xsa", ..., or "random-2s" for mask-grid rows
  SystemMode mode = SystemMode::kXsa;
  double clip_seconds = 3.0;
};

// The five presets, then random-location masks of every length in
// config.ablate.mask_seconds not already covered by dual-random.
std::vector<AblationCell> AblationCells(const RunConfig &config);

struct CellRun {
  std::string cell;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<LevelMetrics> levels;  // one per eval duration
  double seconds = 0.0;              // wall time of train + eval
};

struct AblationReport {
  std::vector<double> durations;
  std::vector<AblationCell> cells;
  std::vector<std::uint64_t> seeds;
  std::vector<CellRun> runs;  // cell-major, then seed

  const CellRun &Run(const std::string &cell, std::uint64_t seed) const;
  // Mean over successful seeds; empty if none succeeded.
  std::vector<LevelMetrics> Mean(const std::string &cell) const;
};

struct AblationOptions {
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;
  // When set, checkpoints and training logs go under this directory.
  std::string out_dir;
  std::ostream *progress = nullptr;
};

/// Trains and evaluates every (cell, seed) pair on a worker pool.  A failing
/// pair is recorded and the rest continue.  Results do not depend on jobs.
AblationReport RunAblation(const RunConfig &config, const std::vector<Utterance> &train,
                           const std::vector<Utterance> &test,
                           const std::vector<std::string> &languages,
                           const AblationOptions &options);

std::string FormatAblationMarkdown(const AblationReport &report);
// One row per (cell, seed) plus a "mean" row per cell.
std::string FormatAblationCsv(const AblationReport &report);

}  // namespace dlid

#endif  // DLID_ABLATION_H_
