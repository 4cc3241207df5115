// tools/dlid.cpp

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

// Command-line front end: gen-data, train, eval, score, ablate.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "dlid/commands.h"
#include "dlid/errors.h"

namespace {

int Fail(int code, const std::string &msg) {
  std::cerr << "dlid: " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char **argv) {
  dlid::KeepHeapMemory();
  CLI::App app{"Dual-mode x-vector self-attention language identification"};
  app.require_subcommand(1);

  std::string config_path, out, data_dir, ckpt, mode = "dual-random", log_path, manifest;
  std::string durations = "1s,3s,10s,30s", csv_out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> metrics, files;
  bool random_crop = false, normalized = false, detection = false, no_mask_grid = false;
  std::size_t seeds = 0, jobs = 1, eval_batch = 64;

  auto *gen = app.add_subcommand("gen-data", "Generate the synthetic corpus");
  gen->add_option("--config", config_path, "Run config (JSON)")->required();
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--seed", seed, "Corpus seed (overrides DLID_SEED and the config)");

  auto *train = app.add_subcommand("train", "Train one system");
  train->add_option("--config", config_path, "Run config (JSON)")->required();
  train->add_option("--data", data_dir, "Corpus directory")->required();
  train->add_option("--out", ckpt, "Checkpoint path")->required();
  train->add_option("--mode", mode, "xsa | xsa-aug | dual-nokd | dual-fixed | dual-random");
  train->add_option("--log", log_path, "Training log (default <out>.log)");
  train->add_option("--seed", seed, "Training seed");

  auto *eval = app.add_subcommand("eval", "Score test utterances at duration levels");
  eval->add_option("--ckpt", ckpt, "Checkpoint")->required();
  eval->add_option("--manifest", manifest, "Test manifest (JSONL)")->required();
  eval->add_option("--out", out, "Output directory for scores_<d>s.csv")->required();
  eval->add_option("--durations", durations, "Comma-separated levels, e.g. 1s,3s,10s,30s");
  eval->add_option("--batch", eval_batch, "Utterances per forward batch");
  eval->add_flag("--random-crop", random_crop, "Random window instead of the prefix");
  eval->add_option("--seed", seed, "Seed for --random-crop");

  auto *score = app.add_subcommand("score", "Compute metrics from scores files");
  score->add_option("--metric", metrics, "acc | eer | cavg (repeatable; default all)");
  score->add_flag("--cavg-normalized", normalized, "Average the false-alarm sum over Q-1");
  score->add_flag("--cavg-detection", detection, "LLR >= 0 decisions instead of argmax");
  score->add_option("--csv", csv_out, "Also write the table as CSV");
  score->add_option("files", files, "Scores CSV files")->required();

  auto *ablate = app.add_subcommand("ablate", "Train and evaluate every system over seeds");
  ablate->add_option("--config", config_path, "Run config (JSON)")->required();
  ablate->add_option("--data", data_dir, "Corpus directory")->required();
  ablate->add_option("--out", out, "Report directory")->required();
  ablate->add_option("--seeds", seeds, "Number of seeds (default from config)");
  ablate->add_option("--jobs", jobs, "Parallel training cells");
  ablate->add_flag("--no-mask-grid", no_mask_grid, "Skip the mask-length rows");
  ablate->add_option("--seed", seed, "First seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      const dlid::RunConfig config = dlid::LoadRunConfig(config_path);
      dlid::CmdGenData(config, out, dlid::ResolveSeed(config, seed), std::cout);
    } else if (train->parsed()) {
      const dlid::RunConfig config = dlid::LoadRunConfig(config_path);
      dlid::TrainArgs a{data_dir, ckpt, log_path, dlid::ParseSystemMode(mode),
                        dlid::ResolveSeed(config, seed)};
      dlid::CmdTrain(config, a, std::cout);
    } else if (eval->parsed()) {
      dlid::EvalArgs a;
      a.checkpoint = ckpt;
      a.manifest = manifest;
      a.out_dir = out;
      a.durations = dlid::ParseDurations(durations);
      a.eval.batch_size = eval_batch;
      a.eval.random_crop = random_crop;
      a.seed = dlid::ResolveSeed(dlid::RunConfig{}, seed);
      if (eval_batch == 0) throw dlid::ConfigError("--batch: must be >= 1");
      dlid::CmdEval(a, std::cout, std::cerr);
    } else if (score->parsed()) {
      dlid::ScoreArgs a;
      a.files = files;
      if (!metrics.empty()) a.metrics = metrics;
      a.cavg.normalized = normalized;
      a.cavg.detection = detection;
      a.csv_out = csv_out;
      dlid::CmdScore(a, std::cout);
    } else if (ablate->parsed()) {
      dlid::RunConfig config = dlid::LoadRunConfig(config_path);
      if (no_mask_grid) config.ablate.mask_grid = false;
      dlid::AblateArgs a{data_dir, out, seeds ? seeds : config.ablate.seeds, jobs,
                         dlid::ResolveSeed(config, seed)};
      dlid::CmdAblate(config, a, std::cout);
    }
  } catch (const dlid::ConfigError &e) {
    return Fail(1, e.what());
  } catch (const dlid::NumericError &e) {
    return Fail(3, std::string("numeric failure: ") + e.what());
  } catch (const dlid::DataError &e) {
    return Fail(2, e.what());
  } catch (const std::exception &e) {
    return Fail(2, e.what());
  }
  return 0;
}
