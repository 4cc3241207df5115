// src/synth.cc

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

#include "dlid/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <iomanip>
#include <sstream>

#include "dlid/binary-io.h"
#include "dlid/errors.h"
#include "dlid/json-fields.h"

namespace dlid {
namespace fs = std::filesystem;

void SynthLangSpec::Validate() const {
  auto bad = [](const std::string &field, const std::string &msg) {
    throw ConfigError("data.lang." + field + ": " + msg);
  };
  if (n_langs < 2) bad("n_langs", "need at least 2 languages");
  if (n_states < 1) bad("n_states", "must be >= 1");
  if (feat_dim < 1) bad("feat_dim", "must be >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) bad("delta", "must be finite and >= 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) bad("sigma", "must be finite and > 0");
  if (!(dirichlet_alpha > 0.0)) bad("dirichlet_alpha", "must be > 0");
  if (frame_rate < 1) bad("frame_rate", "must be >= 1");
}

nlohmann::json ToJson(const SynthLangSpec &s) {
  return {{"n_langs", s.n_langs},   {"n_states", s.n_states}, {"feat_dim", s.feat_dim},
          {"delta", s.delta},       {"sigma", s.sigma},       {"dirichlet_alpha", s.dirichlet_alpha},
          {"frame_rate", s.frame_rate}};
}

SynthLangSpec SynthLangSpecFromJson(const nlohmann::json &j, const std::string &context) {
  SynthLangSpec s;
  JsonFields f(j, context);
  f.Get("n_langs", s.n_langs);
  f.Get("n_states", s.n_states);
  f.Get("feat_dim", s.feat_dim);
  f.Get("delta", s.delta);
  f.Get("sigma", s.sigma);
  f.Get("dirichlet_alpha", s.dirichlet_alpha);
  f.Get("frame_rate", s.frame_rate);
  f.Finish();
  return s;
}

std::vector<std::string> SynthLanguages::names() const {
  std::vector<std::string> out;
  for (const SynthLanguage &l : languages) out.push_back(l.name);
  return out;
}

SynthLanguages BuildLanguages(const SynthLangSpec &spec, std::uint64_t seed) {
  spec.Validate();
  const std::size_t m = spec.n_states, f = spec.feat_dim;
  SynthLanguages out;
  out.spec = spec;
  std::normal_distribution<double> normal(0.0, 1.0);
  {
    KeyedStream rng(seed, {HashString("state-means")});
    out.state_means.resize(m * f);
    for (double &v : out.state_means) v = normal(rng);
  }
  std::gamma_distribution<double> gamma(spec.dirichlet_alpha, 1.0);
  for (std::size_t l = 0; l < spec.n_langs; ++l) {
    SynthLanguage lang;
    lang.name = "lang" + std::to_string(l);
    KeyedStream rng(seed, {HashString("language"), l});
    std::vector<double> p(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += p[i * m + j] = gamma(rng);
      if (sum <= 0.0) {
        // Every draw underflowed; fall back to staying put.
        p[i * m + i] = sum = 1.0;
      }
      for (std::size_t j = 0; j < m; ++j) p[i * m + j] /= sum;
    }
    // Symmetric off-diagonal mass, remainder on the diagonal: doubly
    // stochastic, so the stationary distribution is uniform.
    lang.transitions.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      double off = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != i) off += lang.transitions[i * m + j] = std::min(p[i * m + j], p[j * m + i]);
      lang.transitions[i * m + i] = 1.0 - off;
    }
    lang.offsets.resize(m * f);
    for (double &v : lang.offsets) v = normal(rng);
    out.languages.push_back(std::move(lang));
  }
  return out;
}

Tensor<float> GenerateUtterance(const SynthLanguages &langs, std::size_t lang, std::size_t frames,
                                KeyedStream &rng) {
  const SynthLangSpec &spec = langs.spec;
  const SynthLanguage &l = langs.languages.at(lang);
  const std::size_t m = spec.n_states, f = spec.feat_dim;
  std::uniform_int_distribution<std::size_t> initial(0, m - 1);
  std::normal_distribution<double> noise(0.0, spec.sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tensor<float> out({frames, f});
  std::size_t state = initial(rng);
  for (std::size_t t = 0; t < frames; ++t) {
    if (t > 0) {
      const double u = unit(rng);
      double acc = 0.0;
      std::size_t next = m - 1;
      for (std::size_t j = 0; j < m; ++j) {
        acc += l.transitions[state * m + j];
        if (u < acc) {
          next = j;
          break;
        }
      }
      state = next;
    }
    for (std::size_t d = 0; d < f; ++d)
      out(t, d) = static_cast<float>(langs.state_means[state * f + d] +
                                     spec.delta * l.offsets[state * f + d] + noise(rng));
  }
  return out;
}

void CorpusSpec::Validate() const {
  lang.Validate();
  auto bad = [](const std::string &field, const std::string &msg) {
    throw ConfigError("data." + field + ": " + msg);
  };
  if (train_utts < 1) bad("train_utts", "must be >= 1");
  if (dev_utts < 1) bad("dev_utts", "must be >= 1");
  if (test_utts < 1) bad("test_utts", "must be >= 1");
  if (!(train_min_seconds > 0.0)) bad("train_min_seconds", "must be > 0");
  if (!(train_max_seconds >= train_min_seconds))
    bad("train_max_seconds", "must be >= train_min_seconds");
  if (!(test_seconds > 0.0)) bad("test_seconds", "must be > 0");
  if (test_levels.empty()) bad("test_levels", "must not be empty");
  for (double s : test_levels)
    if (!(s > 0.0) || s > test_seconds) bad("test_levels", "levels must lie in (0, test_seconds]");
}

nlohmann::json ToJson(const CorpusSpec &s) {
  return {{"lang", ToJson(s.lang)},
          {"train_utts", s.train_utts},
          {"dev_utts", s.dev_utts},
          {"test_utts", s.test_utts},
          {"train_min_seconds", s.train_min_seconds},
          {"train_max_seconds", s.train_max_seconds},
          {"test_seconds", s.test_seconds},
          {"test_levels", s.test_levels}};
}

CorpusSpec CorpusSpecFromJson(const nlohmann::json &j, const std::string &context) {
  CorpusSpec s;
  JsonFields f(j, context);
  f.Nested("lang", [&](const nlohmann::json &v, const std::string &path) {
    s.lang = SynthLangSpecFromJson(v, path);
  });
  f.Get("train_utts", s.train_utts);
  f.Get("dev_utts", s.dev_utts);
  f.Get("test_utts", s.test_utts);
  f.Get("train_min_seconds", s.train_min_seconds);
  f.Get("train_max_seconds", s.train_max_seconds);
  f.Get("test_seconds", s.test_seconds);
  f.Get("test_levels", s.test_levels);
  f.Finish();
  return s;
}

std::string LevelManifestName(double seconds) {
  std::ostringstream os;
  os << "test_" << seconds << "s.jsonl";
  return os.str();
}

namespace {

std::size_t SecondsToFrames(double seconds, std::size_t rate) {
  return static_cast<std::size_t>(std::lround(seconds * static_cast<double>(rate)));
}

std::vector<ManifestRecord> GenerateSplit(const SynthLanguages &langs, const std::string &split,
                                          std::size_t count, std::size_t min_frames,
                                          std::size_t max_frames, std::uint64_t seed,
                                          const std::string &out_dir) {
  const std::string rel_dir = "feats/" + split;
  fs::create_directories(fs::path(out_dir) / rel_dir);
  std::vector<ManifestRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    KeyedStream rng(seed, {HashString(split), i});
    const std::size_t lang = i % langs.languages.size();
    std::uniform_int_distribution<std::size_t> dur(min_frames, max_frames);
    const std::size_t frames = dur(rng);
    std::ostringstream id;
    id << split << "-" << std::setw(5) << std::setfill('0') << i;
    ManifestRecord r;
    r.id = id.str();
    r.path = rel_dir + "/" + r.id + ".fea";
    r.language = langs.languages[lang].name;
    r.frames = frames;
    WriteFeatures((fs::path(out_dir) / r.path).string(), GenerateUtterance(langs, lang, frames, rng));
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

void GenerateCorpus(const CorpusSpec &spec, std::uint64_t seed, const std::string &out_dir) {
  spec.Validate();
  fs::create_directories(out_dir);
  const SynthLanguages langs = BuildLanguages(spec.lang, seed);
  const std::size_t rate = spec.lang.frame_rate;
  const std::size_t lo = SecondsToFrames(spec.train_min_seconds, rate);
  const std::size_t hi = SecondsToFrames(spec.train_max_seconds, rate);
  const std::size_t test_frames = SecondsToFrames(spec.test_seconds, rate);
  auto out = [&](const std::string &name) { return (fs::path(out_dir) / name).string(); };
  WriteManifest(out("train.jsonl"), GenerateSplit(langs, "train", spec.train_utts, lo, hi, seed, out_dir));
  WriteManifest(out("dev.jsonl"), GenerateSplit(langs, "dev", spec.dev_utts, lo, hi, seed, out_dir));
  std::vector<ManifestRecord> test =
      GenerateSplit(langs, "test", spec.test_utts, test_frames, test_frames, seed, out_dir);
  WriteManifest(out("test.jsonl"), test);
  for (double level : spec.test_levels) {
    std::vector<ManifestRecord> cut = test;
    const std::size_t frames = SecondsToFrames(level, rate);
    for (ManifestRecord &r : cut)
      if (frames < r.frames) r.trunc_frames = frames;
    WriteManifest(out(LevelManifestName(level)), cut);
  }
  nlohmann::ordered_json info;
  info["spec"] = ToJson(spec);
  info["seed"] = seed;
  info["languages"] = langs.names();
  WriteFileBytes(out("corpus.json"), info.dump(2) + "\n");
}

CorpusInfo ReadCorpusInfo(const std::string &dir) {
  const std::string path = (fs::path(dir) / "corpus.json").string();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFileBytes(path));
  } catch (const nlohmann::json::exception &e) {
    throw DataError(path + ": " + e.what());
  }
  CorpusInfo info;
  try {
    info.spec = CorpusSpecFromJson(j.at("spec"), "spec");
    info.seed = j.at("seed").get<std::uint64_t>();
    info.languages = j.at("languages").get<std::vector<std::string>>();
  } catch (const std::exception &e) {
    throw DataError(path + ": " + e.what());
  }
  return info;
}

CentroidOracle::CentroidOracle(const std::vector<Tensor<float>> &train,
                               const std::vector<int> &labels, std::size_t n_langs) {
  if (train.empty() || train.size() != labels.size())
    throw std::invalid_argument("CentroidOracle: need matching non-empty data and labels");
  dim_ = train[0].dim(1);
  centroids_.assign(n_langs, std::vector<double>(dim_, 0.0));
  std::vector<std::size_t> counts(n_langs, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const std::size_t frames = train[i].dim(0);
    auto &c = centroids_.at(static_cast<std::size_t>(labels[i]));
    for (std::size_t t = 0; t < frames; ++t)
      for (std::size_t d = 0; d < dim_; ++d) c[d] += train[i](t, d) / static_cast<double>(frames);
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (std::size_t l = 0; l < n_langs; ++l)
    for (double &v : centroids_[l]) v /= static_cast<double>(std::max<std::size_t>(counts[l], 1));
}

int CentroidOracle::Classify(const Tensor<float> &feats, std::size_t frames) const {
  if (frames == 0 || frames > feats.dim(0)) frames = feats.dim(0);
  std::vector<double> mean(dim_, 0.0);
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t d = 0; d < dim_; ++d) mean[d] += feats(t, d);
  for (double &v : mean) v /= static_cast<double>(frames);
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < centroids_.size(); ++l) {
    double dist = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) dist += (mean[d] - centroids_[l][d]) * (mean[d] - centroids_[l][d]);
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(l);
    }
  }
  return best;
}

}  // namespace dlid
