// src/metrics.cc

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

#include "dlid/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "dlid/binary-io.h"
#include "dlid/errors.h"

namespace dlid {

void ScoreTable::Validate() const {
  const std::size_t q = languages.size();
  if (q < 2) throw std::invalid_argument("score table needs at least 2 languages");
  for (const ScoreRow &r : rows) {
    if (r.log_posteriors.size() != q)
      throw std::invalid_argument(r.id + ": expected " + std::to_string(q) + " scores");
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= q)
      throw std::invalid_argument(r.id + ": label out of range");
    double sum = 0.0;
    for (double s : r.log_posteriors) {
      if (!std::isfinite(s)) throw std::invalid_argument(r.id + ": non-finite score");
      sum += std::exp(s);
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument(r.id + ": posteriors sum to " + std::to_string(sum));
  }
}

int Argmax(const std::vector<double> &scores) {
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double Accuracy(const ScoreTable &table) {
  if (table.rows.empty()) throw std::invalid_argument("accuracy: empty score table");
  std::size_t correct = 0;
  for (const ScoreRow &r : table.rows) correct += Argmax(r.log_posteriors) == r.label;
  return static_cast<double>(correct) / static_cast<double>(table.rows.size());
}

double Eer(const std::vector<double> &target, const std::vector<double> &nontarget) {
  if (target.empty() || nontarget.empty())
    throw std::invalid_argument("eer: need at least one target and one non-target trial");
  std::vector<double> tar = target, non = nontarget;
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> thresholds = tar;
  thresholds.insert(thresholds.end(), non.begin(), non.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double nt = static_cast<double>(tar.size()), nn = static_cast<double>(non.size());
  double best_gap = 2.0, eer = 0.5;
  for (double th : thresholds) {
    // Rejected targets score below th; accepted non-targets at or above it.
    const double miss = static_cast<double>(std::lower_bound(tar.begin(), tar.end(), th) - tar.begin()) / nt;
    const double fa = static_cast<double>(non.end() - std::lower_bound(non.begin(), non.end(), th)) / nn;
    const double gap = std::abs(miss - fa);
    if (gap < best_gap) {
      best_gap = gap;
      eer = 0.5 * (miss + fa);
    }
  }
  return eer;
}

double Eer(const ScoreTable &table) {
  std::vector<double> tar, non;
  for (const ScoreRow &r : table.rows)
    for (std::size_t l = 0; l < r.log_posteriors.size(); ++l)
      (static_cast<int>(l) == r.label ? tar : non).push_back(r.log_posteriors[l]);
  return Eer(tar, non);
}

namespace {

// log(p / ((1 - p) / (Q - 1))) computed from the log-posteriors.
double LogLikelihoodRatio(const std::vector<double> &lp, std::size_t target) {
  double rest = 0.0;
  for (std::size_t l = 0; l < lp.size(); ++l)
    if (l != target) rest += std::exp(lp[l]);
  return lp[target] - std::log(rest / static_cast<double>(lp.size() - 1));
}

}  // namespace

double CAvg(const ScoreTable &table, const CostParams &params, const CavgOptions &options) {
  const std::size_t q = table.languages.size();
  if (q < 2) throw std::invalid_argument("c_avg: need at least 2 languages");
  std::vector<double> truth_count(q, 0.0);
  // accepted[t][n]: rows of true language n accepted as language t.
  std::vector<std::vector<double>> accepted(q, std::vector<double>(q, 0.0));
  for (const ScoreRow &r : table.rows) {
    const auto n = static_cast<std::size_t>(r.label);
    truth_count.at(n) += 1.0;
    if (options.detection) {
      for (std::size_t t = 0; t < q; ++t)
        if (LogLikelihoodRatio(r.log_posteriors, t) >= 0.0) accepted[t][n] += 1.0;
    } else {
      accepted[static_cast<std::size_t>(Argmax(r.log_posteriors))][n] += 1.0;
    }
  }
  for (std::size_t l = 0; l < q; ++l)
    if (truth_count[l] == 0.0)
      throw std::invalid_argument("c_avg: language '" + table.languages[l] + "' has no trials");
  double total = 0.0;
  for (std::size_t t = 0; t < q; ++t) {
    const double p_miss = 1.0 - accepted[t][t] / truth_count[t];
    double fa = 0.0;
    for (std::size_t n = 0; n < q; ++n)
      if (n != t) fa += params.c_fa * (1.0 - params.p_target) * accepted[t][n] / truth_count[n];
    if (options.normalized) fa /= static_cast<double>(q - 1);
    total += params.c_miss * params.p_target * p_miss + fa;
  }
  return total / static_cast<double>(q);
}

std::string FormatScoresCsv(const ScoreTable &table) {
  std::string out = "utt_id,label";
  for (const std::string &l : table.languages) out += "," + l;
  out += '\n';
  char buf[32];
  for (const ScoreRow &r : table.rows) {
    out += r.id + "," + table.languages.at(static_cast<std::size_t>(r.label));
    for (double s : r.log_posteriors) {
      std::snprintf(buf, sizeof(buf), ",%.9g", s);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> SplitCsv(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ScoreTable ParseScoresCsv(std::string_view text, const std::string &what) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError(what + ": empty scores file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = SplitCsv(line);
  if (header.size() < 4 || header[0] != "utt_id" || header[1] != "label")
    throw DataError(what + ": header must be utt_id,label,<languages...>");
  ScoreTable table;
  table.languages.assign(header.begin() + 2, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = what + ":" + std::to_string(lineno);
    std::vector<std::string> cells = SplitCsv(line);
    if (cells.size() != header.size()) throw DataError(where + ": wrong number of columns");
    ScoreRow row;
    row.id = cells[0];
    auto it = std::find(table.languages.begin(), table.languages.end(), cells[1]);
    if (it == table.languages.end()) throw DataError(where + ": unknown label '" + cells[1] + "'");
    row.label = static_cast<int>(it - table.languages.begin());
    for (std::size_t c = 2; c < cells.size(); ++c) {
      char *end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || *end != '\0') throw DataError(where + ": bad number '" + cells[c] + "'");
      row.log_posteriors.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  try {
    table.Validate();
  } catch (const std::invalid_argument &e) {
    throw DataError(what + ": " + e.what());
  }
  return table;
}

void WriteScoresCsv(const std::string &path, const ScoreTable &table) {
  WriteFileBytes(path, FormatScoresCsv(table));
}

ScoreTable ReadScoresCsv(const std::string &path) { return ParseScoresCsv(ReadFileBytes(path), path); }

}  // namespace dlid
