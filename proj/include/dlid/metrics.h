// include/dlid/metrics.h

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

#ifndef DLID_METRICS_H_
#define DLID_METRICS_H_

#include <string>
#include <string_view>
#include <vector>

namespace dlid {

struct ScoreRow {
  std::string id;
  int label = 0;
  std::vector<double> log_posteriors;  // one per language
};

/// Per-utterance log-posteriors over a closed language set.
struct ScoreTable {
  std::vector<std::string> languages;
  std::vector<ScoreRow> rows;

  // Throws std::invalid_argument unless Q >= 2, every row has Q finite
  // scores, labels are in range and exp(scores) sums to 1 within 1e-6.
  void Validate() const;
};

// Index of the largest score; ties go to the lowest index.
int Argmax(const std::vector<double> &scores);

// Fraction of rows whose argmax is the true language.
double Accuracy(const ScoreTable &table);

/// Pooled-trial equal error rate: every (row, language) pair is a trial
/// scored by that language's log-posterior, target iff it is the true
/// language.  Thresholds are the distinct scores (accept iff score >=
/// threshold); the result is (P_miss + P_FA) / 2 at the first threshold
/// minimizing |P_miss - P_FA|.
double Eer(const ScoreTable &table);
double Eer(const std::vector<double> &target_scores, const std::vector<double> &nontarget_scores);

struct CostParams {
  double c_miss = 1.0;
  double c_fa = 1.0;
  double p_target = 0.5;
};

struct CavgOptions {
  // Divide the summed false-alarm term by Q - 1.
  bool normalized = false;
  // Accept target L for a row iff its log-likelihood ratio against the
  // pooled non-targets is >= 0, instead of argmax decisions.
  bool detection = false;
};

/// C_avg = 1/Q sum_T [C_miss P_tar P_miss(T) + sum_{N != T} C_FA (1 - P_tar) P_FA(T, N)]
/// with the false-alarm sum as written (not averaged) unless
/// options.normalized.  Throws std::invalid_argument if some language has no
/// rows.
double CAvg(const ScoreTable &table, const CostParams &params = {}, const CavgOptions &options = {});

// CSV with header "utt_id,label,<lang_1>,...,<lang_Q>"; scores use %.9g.
std::string FormatScoresCsv(const ScoreTable &table);
// Throws DataError on malformed rows, unknown labels or posteriors that do
// not sum to one.
ScoreTable ParseScoresCsv(std::string_view text, const std::string &what = "scores");

void WriteScoresCsv(const std::string &path, const ScoreTable &table);
ScoreTable ReadScoresCsv(const std::string &path);

}  // namespace dlid

#endif  // DLID_METRICS_H_
