// include/dlid/commands.h

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

#ifndef DLID_COMMANDS_H_
#define DLID_COMMANDS_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dlid/metrics.h"
#include "dlid/run-config.h"
#include "dlid/trainer.h"

namespace dlid {

// Library side of the dlid tool.  Errors surface as ConfigError, DataError
// or NumericError; the tool maps them to exit codes 1, 2 and 3.

// Keeps freed blocks in the heap instead of returning them to the kernel.
// Training allocates and drops many large tensors per step; without this
// most of the time goes to page faults.  No-op outside glibc.
void KeepHeapMemory();

void CmdGenData(const RunConfig &config, const std::string &out_dir, std::uint64_t seed,
                std::ostream &out);

struct TrainArgs {
  std::string data_dir;
  std::string checkpoint;
  std::string log_path;  // defaults to <checkpoint>.log
  SystemMode mode = SystemMode::kDualRandom;
  std::uint64_t seed = 0;
};

void CmdTrain(const RunConfig &config, const TrainArgs &args, std::ostream &out);

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;  // its directory must hold corpus.json
  std::string out_dir;
  std::vector<double> durations;
  EvalConfig eval;
  std::uint64_t seed = 0;
};

// Writes <out_dir>/scores_<d>s.csv per duration and returns the paths.
// Utterances shorter than a level are reported on `err`.
std::vector<std::string> CmdEval(const EvalArgs &args, std::ostream &out, std::ostream &err);

// "1s,3s,10" -> {1, 3, 10}.  Throws ConfigError.
std::vector<double> ParseDurations(const std::string &text);

struct ScoreArgs {
  std::vector<std::string> files;
  std::vector<std::string> metrics{"acc", "eer", "cavg"};
  CavgOptions cavg;
  std::string csv_out;
};

void CmdScore(const ScoreArgs &args, std::ostream &out);

struct AblateArgs {
  std::string data_dir;
  std::string out_dir;
  std::size_t seeds = 5;
  std::size_t jobs = 1;
  std::uint64_t base_seed = 0;
};

void CmdAblate(const RunConfig &config, const AblateArgs &args, std::ostream &out);

}  // namespace dlid

#endif  // DLID_COMMANDS_H_
