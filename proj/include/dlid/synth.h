// include/dlid/synth.h

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

#ifndef DLID_SYNTH_H_
#define DLID_SYNTH_H_

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dlid/feature-io.h"
#include "dlid/keyed-rng.h"
#include "dlid/tensor.h"

namespace dlid {

/// Generator for synthetic "languages": every language is a Markov chain over
/// M shared hidden states.  A frame in state m of language l is
///   mu_m + delta * mu_{l,m} + sigma * N(0, I).
/// Transition rows are Dirichlet(alpha) draws, symmetrized so that all
/// languages share the uniform stationary distribution; the language is then
/// only visible through the offsets and the transition dynamics.
struct SynthLangSpec {
  std::size_t n_langs = 4;
  std::size_t n_states = 16;
  std::size_t feat_dim = 20;
  double delta = 0.3;
  double sigma = 1.0;
  double dirichlet_alpha = 0.3;
  std::size_t frame_rate = 100;  // frames per second

  void Validate() const;
  friend bool operator==(const SynthLangSpec &, const SynthLangSpec &) = default;
};

nlohmann::json ToJson(const SynthLangSpec &spec);
SynthLangSpec SynthLangSpecFromJson(const nlohmann::json &j, const std::string &context);

struct SynthLanguage {
  std::string name;
  std::vector<double> transitions;  // M x M, rows sum to 1
  std::vector<double> offsets;      // M x F
};

struct SynthLanguages {
  SynthLangSpec spec;
  std::vector<double> state_means;  // M x F
  std::vector<SynthLanguage> languages;

  std::vector<std::string> names() const;
};

// Pure function of (spec, seed).
SynthLanguages BuildLanguages(const SynthLangSpec &spec, std::uint64_t seed);

// frames x F features for one utterance of language `lang`.
Tensor<float> GenerateUtterance(const SynthLanguages &langs, std::size_t lang, std::size_t frames,
                                KeyedStream &rng);

/// Split sizes and duration ranges for a generated corpus.
struct CorpusSpec {
  SynthLangSpec lang;
  std::size_t train_utts = 800;
  std::size_t dev_utts = 200;
  std::size_t test_utts = 200;
  double train_min_seconds = 4.0;
  double train_max_seconds = 16.0;
  double test_seconds = 30.0;  // held-out utterance length before truncation
  std::vector<double> test_levels{1.0, 3.0, 10.0, 30.0};

  void Validate() const;
  friend bool operator==(const CorpusSpec &, const CorpusSpec &) = default;
};

nlohmann::json ToJson(const CorpusSpec &spec);
CorpusSpec CorpusSpecFromJson(const nlohmann::json &j, const std::string &context);

// Name of the per-level test manifest, e.g. "test_3s.jsonl".
std::string LevelManifestName(double seconds);

/// Writes into out_dir:
///   feats/<split>/<id>.fea, train.jsonl, dev.jsonl, test.jsonl,
///   test_<level>s.jsonl (prefix truncations of the test utterances),
///   corpus.json (spec, seed, language names).
/// Labels cycle through the languages so splits are balanced.  Output is a
/// pure function of (spec, seed).
void GenerateCorpus(const CorpusSpec &spec, std::uint64_t seed, const std::string &out_dir);

struct CorpusInfo {
  CorpusSpec spec;
  std::uint64_t seed = 0;
  std::vector<std::string> languages;
};

CorpusInfo ReadCorpusInfo(const std::string &dir);

/// Frame-mean nearest-centroid classifier: language centroids are the mean
/// of per-utterance frame means over `train`.
class CentroidOracle {
 public:
  CentroidOracle(const std::vector<Tensor<float>> &train, const std::vector<int> &labels,
                 std::size_t n_langs);
  // Classifies the first `frames` frames (all when 0).
  int Classify(const Tensor<float> &feats, std::size_t frames = 0) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> centroids_;
};

}  // namespace dlid

#endif  // DLID_SYNTH_H_
