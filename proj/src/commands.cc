// src/commands.cc

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

#include "dlid/commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "dlid/ablation.h"
#include "dlid/binary-io.h"
#include "dlid/checkpoint.h"
#include "dlid/errors.h"
#include "dlid/evaluate.h"

namespace dlid {
namespace fs = std::filesystem;

namespace {

std::string SecondsLabel(double s) {
  std::ostringstream os;
  os << s << "s";
  return os.str();
}

void RequireDir(const std::string &dir, const std::string &what) {
  if (!fs::is_directory(dir)) throw DataError(what + " '" + dir + "' is not a directory");
}

}  // namespace

void KeepHeapMemory() {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

void CmdGenData(const RunConfig &config, const std::string &out_dir, std::uint64_t seed,
                std::ostream &out) {
  GenerateCorpus(config.data, seed, out_dir);
  const CorpusSpec &s = config.data;
  out << "wrote corpus to " << out_dir << ": " << s.train_utts << " train, " << s.dev_utts
      << " dev, " << s.test_utts << " test utterances, " << s.lang.n_langs
      << " languages, seed " << seed << "\n";
}

void CmdTrain(const RunConfig &config, const TrainArgs &args, std::ostream &out) {
  RequireDir(args.data_dir, "data directory");
  const CorpusInfo info = ReadCorpusInfo(args.data_dir);
  if (info.languages.size() != config.model.n_langs)
    throw ConfigError("model.n_langs: corpus has " + std::to_string(info.languages.size()) +
                      " languages");
  const std::vector<Utterance> train =
      LoadDataset((fs::path(args.data_dir) / "train.jsonl").string(), info.languages,
                  config.model.feat_dim, config.model.seg_frames);
  TrainConfig tc = config.train;
  tc.mode = args.mode;
  const std::string log_path = args.log_path.empty() ? args.checkpoint + ".log" : args.log_path;
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw DataError("cannot write " + log_path);
  TrainOutcome result = Train(train, config.model, tc, args.seed, &log);
  log.close();
  WriteCheckpoint(args.checkpoint, config.model, result.params);
  out << "trained " << SystemModeName(tc.mode) << " for " << result.steps << " steps; checkpoint "
      << args.checkpoint << ", log " << log_path << "\n";
}

std::vector<double> ParseDurations(const std::string &text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty() && item.back() == 's') item.pop_back();
    char *end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !(v > 0.0))
      throw ConfigError("--durations: cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--durations: no durations given");
  return out;
}

std::vector<std::string> CmdEval(const EvalArgs &args, std::ostream &out, std::ostream &err) {
  const Checkpoint ckpt = ReadCheckpoint(args.checkpoint);
  const std::string dir = fs::path(args.manifest).parent_path().string();
  const CorpusInfo info = ReadCorpusInfo(dir.empty() ? "." : dir);
  const std::vector<Utterance> data = LoadDataset(args.manifest, info.languages,
                                                  ckpt.config.feat_dim, ckpt.config.seg_frames);
  if (data.empty()) throw DataError(args.manifest + ": empty manifest");
  fs::create_directories(args.out_dir);
  std::vector<std::string> paths;
  for (double d : args.durations) {
    std::vector<std::string> short_ids;
    ScoreTable table = EvaluateLevel(ckpt.params, ckpt.config, data, info.languages, d, args.eval,
                                     args.seed, &short_ids);
    const std::string path = (fs::path(args.out_dir) / ("scores_" + SecondsLabel(d) + ".csv")).string();
    WriteScoresCsv(path, table);
    paths.push_back(path);
    out << SecondsLabel(d) << ": " << table.rows.size() << " utterances -> " << path << "\n";
    if (!short_ids.empty()) {
      err << "warning: " << short_ids.size() << " utterance(s) shorter than " << SecondsLabel(d)
          << " scored in full:";
      for (const std::string &id : short_ids) err << " " << id;
      err << "\n";
    }
  }
  return paths;
}

void CmdScore(const ScoreArgs &args, std::ostream &out) {
  for (const std::string &m : args.metrics)
    if (m != "acc" && m != "eer" && m != "cavg")
      throw ConfigError("--metric: unknown metric '" + m + "' (expected acc, eer or cavg)");
  if (args.files.empty()) throw ConfigError("score: no scores files given");
  std::string header = "scores";
  for (const std::string &m : args.metrics) header += "\t" + m;
  out << header << "\n";
  std::string csv = "scores";
  for (const std::string &m : args.metrics) csv += "," + m;
  csv += "\n";
  char buf[32];
  for (const std::string &f : args.files) {
    const ScoreTable table = ReadScoresCsv(f);
    std::string line = fs::path(f).filename().string(), row = f;
    for (const std::string &m : args.metrics) {
      const double v = m == "acc" ? Accuracy(table) : m == "eer" ? Eer(table) : CAvg(table, {}, args.cavg);
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      line += std::string("\t") + buf;
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      row += std::string(",") + buf;
    }
    out << line << "\n";
    csv += row + "\n";
  }
  if (!args.csv_out.empty()) WriteFileBytes(args.csv_out, csv);
}

void CmdAblate(const RunConfig &config, const AblateArgs &args, std::ostream &out) {
  RequireDir(args.data_dir, "data directory");
  const CorpusInfo info = ReadCorpusInfo(args.data_dir);
  const std::vector<Utterance> train =
      LoadDataset((fs::path(args.data_dir) / "train.jsonl").string(), info.languages,
                  config.model.feat_dim, config.model.seg_frames);
  const std::vector<Utterance> test =
      LoadDataset((fs::path(args.data_dir) / "test.jsonl").string(), info.languages,
                  config.model.feat_dim, config.model.seg_frames);
  AblationOptions opts;
  for (std::size_t s = 0; s < args.seeds; ++s) opts.seeds.push_back(args.base_seed + s);
  opts.jobs = args.jobs;
  opts.out_dir = (fs::path(args.out_dir) / "runs").string();
  opts.progress = &out;
  const AblationReport report = RunAblation(config, train, test, info.languages, opts);
  fs::create_directories(args.out_dir);
  const std::string md = (fs::path(args.out_dir) / "report.md").string();
  const std::string csv = (fs::path(args.out_dir) / "report.csv").string();
  WriteFileBytes(md, FormatAblationMarkdown(report));
  WriteFileBytes(csv, FormatAblationCsv(report));
  out << "wrote " << md << " and " << csv << "\n";
}

}  // namespace dlid
