// src/ablation.cc

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

#include "dlid/ablation.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dlid/checkpoint.h"

namespace dlid {
namespace fs = std::filesystem;

namespace {

std::string SecondsLabel(double s) {
  std::ostringstream os;
  os << s << "s";
  return os.str();
}

std::string Fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<AblationCell> AblationCells(const RunConfig &config) {
  std::vector<AblationCell> cells;
  for (SystemMode m : AllSystemModes())
    cells.push_back({SystemModeName(m), m, config.train.clip_seconds});
  if (config.ablate.mask_grid)
    for (double s : config.ablate.mask_seconds)
      if (s != config.train.clip_seconds)
        cells.push_back({"random-" + SecondsLabel(s), SystemMode::kDualRandom, s});
  return cells;
}

const CellRun &AblationReport::Run(const std::string &cell, std::uint64_t seed) const {
  for (const CellRun &r : runs)
    if (r.cell == cell && r.seed == seed) return r;
  throw std::out_of_range("no ablation run for " + cell + " seed " + std::to_string(seed));
}

std::vector<LevelMetrics> AblationReport::Mean(const std::string &cell) const {
  std::vector<LevelMetrics> sum(durations.size());
  std::size_t n = 0;
  for (const CellRun &r : runs) {
    if (r.cell != cell || !r.ok) continue;
    ++n;
    for (std::size_t l = 0; l < durations.size(); ++l) {
      sum[l].accuracy += r.levels[l].accuracy;
      sum[l].eer += r.levels[l].eer;
      sum[l].cavg += r.levels[l].cavg;
    }
  }
  if (n == 0) return {};
  for (LevelMetrics &m : sum) {
    m.accuracy /= n;
    m.eer /= n;
    m.cavg /= n;
  }
  return sum;
}

AblationReport RunAblation(const RunConfig &config, const std::vector<Utterance> &train,
                           const std::vector<Utterance> &test,
                           const std::vector<std::string> &languages,
                           const AblationOptions &options) {
  AblationReport report;
  report.durations = config.eval.durations;
  report.cells = AblationCells(config);
  report.seeds = options.seeds;
  for (const AblationCell &c : report.cells)
    for (std::uint64_t s : options.seeds) {
      CellRun run;
      run.cell = c.name;
      run.seed = s;
      report.runs.push_back(std::move(run));
    }
  if (!options.out_dir.empty()) fs::create_directories(options.out_dir);

  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < report.runs.size(); i = next++) {
      CellRun &run = report.runs[i];
      const AblationCell &cell = report.cells[i / options.seeds.size()];
      const auto start = std::chrono::steady_clock::now();
      try {
        TrainConfig tc = config.train;
        tc.mode = cell.mode;
        tc.clip_seconds = cell.clip_seconds;
        std::ostringstream log;
        TrainOutcome out = Train(train, config.model, tc, run.seed, &log);
        if (!options.out_dir.empty()) {
          const std::string stem =
              (fs::path(options.out_dir) / (cell.name + "-seed" + std::to_string(run.seed))).string();
          WriteCheckpoint(stem + ".ckpt", config.model, out.params);
          std::ofstream(stem + ".log") << log.str();
        }
        for (double d : config.eval.durations)
          run.levels.push_back(ComputeMetrics(
              EvaluateLevel(out.params, config.model, test, languages, d, config.eval, run.seed),
              config.eval.cavg));
        run.ok = true;
      } catch (const std::exception &e) {
        run.error = e.what();
        run.levels.clear();
      }
      run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (options.progress) {
        std::lock_guard<std::mutex> lock(io);
        *options.progress << "[" << cell.name << " seed " << run.seed << "] "
                          << (run.ok ? "done" : "FAILED: " + run.error) << " in "
                          << Fixed(run.seconds, 1) << " s" << std::endl;
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, report.runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread &t : pool) t.join();
  return report;
}

namespace {

std::string MetricCells(const std::vector<LevelMetrics> &m) {
  std::string out;
  LevelMetrics avg;
  for (const LevelMetrics &l : m) {
    out += " " + Fixed(100 * l.accuracy, 2) + " | " + Fixed(100 * l.eer, 2) + " | " +
           Fixed(l.cavg, 4) + " |";
    avg.accuracy += l.accuracy / m.size();
    avg.eer += l.eer / m.size();
    avg.cavg += l.cavg / m.size();
  }
  out += " " + Fixed(100 * avg.accuracy, 2) + " | " + Fixed(100 * avg.eer, 2) + " | " +
         Fixed(avg.cavg, 4) + " |";
  return out;
}

std::string TableHeader(const std::string &first, const std::vector<double> &durations) {
  std::string h = "| " + first + " |", rule = "|---|";
  for (double d : durations) {
    const std::string s = SecondsLabel(d);
    h += " Acc " + s + " | EER " + s + " | Cavg " + s + " |";
    rule += "---:|---:|---:|";
  }
  h += " Acc avg | EER avg | Cavg avg |\n";
  rule += "---:|---:|---:|\n";
  return h + rule;
}

}  // namespace

std::string FormatAblationMarkdown(const AblationReport &r) {
  std::ostringstream os;
  os << "# Ablation report\n\n";
  os << "Means over " << r.seeds.size() << " seed(s). Acc and EER in %. "
     << "The avg columns average the duration levels.\n\n";
  os << "## Systems\n\n" << TableHeader("System", r.durations);
  auto row = [&](const std::string &label, const std::string &cell) {
    std::vector<LevelMetrics> m = r.Mean(cell);
    if (m.empty()) {
      os << "| " << label << " |";
      for (std::size_t i = 0; i < 3 * (r.durations.size() + 1); ++i) os << " - |";
      os << "\n";
    } else {
      os << "| " << label << " |" << MetricCells(m) << "\n";
    }
  };
  for (SystemMode m : AllSystemModes()) row(SystemModeName(m), SystemModeName(m));

  bool grid = false;
  for (const AblationCell &c : r.cells) grid = grid || c.name.starts_with("random-");
  if (grid) {
    os << "\n## Mask length and location\n\n" << TableHeader("Mask", r.durations);
    std::vector<std::pair<double, std::string>> random;
    for (const AblationCell &c : r.cells)
      if (c.mode == SystemMode::kDualRandom) random.emplace_back(c.clip_seconds, c.name);
    std::sort(random.begin(), random.end());
    for (const auto &[s, name] : random) row("random " + SecondsLabel(s), name);
    for (const AblationCell &c : r.cells)
      if (c.mode == SystemMode::kDualFixed) row("fixed " + SecondsLabel(c.clip_seconds), c.name);
  }

  bool failed = false;
  for (const CellRun &run : r.runs) failed = failed || !run.ok;
  if (failed) {
    os << "\n## Failed runs\n\n";
    for (const CellRun &run : r.runs)
      if (!run.ok) os << "- " << run.cell << " seed " << run.seed << ": " << run.error << "\n";
  }
  return os.str();
}

std::string FormatAblationCsv(const AblationReport &r) {
  std::ostringstream os;
  os << "system,clip_seconds,seed,status";
  for (double d : r.durations) {
    const std::string s = SecondsLabel(d);
    os << ",acc_" << s << ",eer_" << s << ",cavg_" << s;
  }
  os << ",acc_avg,eer_avg,cavg_avg\n";
  auto emit = [&](const std::string &cell, double clip, const std::string &seed,
                  const std::string &status, const std::vector<LevelMetrics> &m) {
    os << cell << "," << clip << "," << seed << "," << status;
    char buf[48];
    LevelMetrics avg;
    for (const LevelMetrics &l : m) {
      std::snprintf(buf, sizeof(buf), ",%.6g,%.6g,%.6g", l.accuracy, l.eer, l.cavg);
      os << buf;
      avg.accuracy += l.accuracy / m.size();
      avg.eer += l.eer / m.size();
      avg.cavg += l.cavg / m.size();
    }
    if (m.empty()) {
      for (std::size_t i = 0; i < 3 * (r.durations.size() + 1); ++i) os << ",";
    } else {
      std::snprintf(buf, sizeof(buf), ",%.6g,%.6g,%.6g", avg.accuracy, avg.eer, avg.cavg);
      os << buf;
    }
    os << "\n";
  };
  for (const AblationCell &c : r.cells) {
    for (std::uint64_t s : r.seeds) {
      const CellRun &run = r.Run(c.name, s);
      emit(c.name, c.clip_seconds, std::to_string(s), run.ok ? "ok" : "failed", run.levels);
    }
    emit(c.name, c.clip_seconds, "mean", "ok", r.Mean(c.name));
  }
  return os.str();
}

}  // namespace dlid
