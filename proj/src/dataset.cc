// src/dataset.cc

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

#include "dlid/dataset.h"

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>

#include "dlid/errors.h"
#include "dlid/keyed-rng.h"

namespace dlid {
namespace fs = std::filesystem;

std::vector<Utterance> LoadDataset(const std::vector<ManifestRecord> &records,
                                   const std::string &base_dir,
                                   const std::vector<std::string> &languages,
                                   std::size_t feat_dim, std::size_t seg_frames) {
  std::map<std::string, std::shared_ptr<const Tensor<float>>> cache;
  std::vector<Utterance> out;
  out.reserve(records.size());
  for (const ManifestRecord &r : records) {
    auto lang = std::find(languages.begin(), languages.end(), r.language);
    if (lang == languages.end())
      throw DataError(r.id + ": unknown language '" + r.language + "'");
    fs::path path(r.path);
    if (path.is_relative()) path = fs::path(base_dir) / path;
    const std::string key = path.lexically_normal().string();
    auto &feats = cache[key];
    if (!feats) feats = std::make_shared<const Tensor<float>>(ReadFeatures(key));
    if (feats->dim(0) != r.frames)
      throw DataError(r.id + ": manifest says " + std::to_string(r.frames) + " frames, file has " +
                      std::to_string(feats->dim(0)));
    if (feats->dim(1) != feat_dim)
      throw DataError(r.id + ": feature dimension " + std::to_string(feats->dim(1)) +
                      " does not match the model's " + std::to_string(feat_dim));
    if (r.usable_frames() < seg_frames)
      throw DataError(r.id + ": utterance too short (" + std::to_string(r.usable_frames()) +
                      " frames, one segment is " + std::to_string(seg_frames) + ")");
    out.push_back(Utterance{r.id, static_cast<int>(lang - languages.begin()), feats,
                            r.usable_frames()});
  }
  return out;
}

std::vector<Utterance> LoadDataset(const std::string &manifest_path,
                                   const std::vector<std::string> &languages,
                                   std::size_t feat_dim, std::size_t seg_frames) {
  return LoadDataset(ReadManifest(manifest_path), fs::path(manifest_path).parent_path().string(),
                     languages, feat_dim, seg_frames);
}

std::vector<Utterance> AugmentWithClips(const std::vector<Utterance> &data, double seconds,
                                        std::size_t seg_frames) {
  std::vector<ManifestRecord> records;
  for (const Utterance &u : data) records.push_back({u.id, "", "", u.frames, std::nullopt});
  std::vector<ManifestRecord> aug = AugmentWithClips(records, seconds, seg_frames);
  std::vector<Utterance> out = data;
  for (std::size_t i = data.size(); i < aug.size(); ++i) {
    Utterance u = data[i - data.size()];
    u.id = aug[i].id;
    u.frames = aug[i].usable_frames();
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<std::vector<std::size_t>> BatchOrder(std::size_t n, std::size_t batch_size,
                                                 std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  KeyedStream rng(seed, {HashString("batch-order"), epoch});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; i += batch_size)
    out.emplace_back(order.begin() + i, order.begin() + std::min(n, i + batch_size));
  return out;
}

Batch AssembleBatch(const std::vector<Utterance> &data, const std::vector<std::size_t> &indices,
                    std::size_t seg_frames) {
  if (indices.empty()) throw std::invalid_argument("AssembleBatch: no utterances");
  Batch b;
  std::size_t t_max = 0;
  for (std::size_t i : indices) {
    const std::size_t t = data.at(i).frames / seg_frames;
    b.lengths.push_back(t);
    t_max = std::max(t_max, t);
  }
  const std::size_t f = data[indices[0]].feats->dim(1);
  const std::size_t per_utt = t_max * seg_frames * f;
  b.segments = Tensor<float>({indices.size(), t_max, seg_frames, f});
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Utterance &u = data[indices[k]];
    // Segments are consecutive frame blocks, so the real part is a plain
    // prefix copy of the feature rows.
    std::copy_n(u.feats->data(), b.lengths[k] * seg_frames * f, b.segments.data() + k * per_utt);
    b.pad_masks.push_back(PaddingMask(b.lengths[k], t_max));
    b.labels.push_back(u.label);
    b.ids.push_back(u.id);
  }
  return b;
}

std::vector<Batch> MakeBatches(const std::vector<Utterance> &data, std::size_t batch_size,
                               std::size_t seg_frames, std::uint64_t seed, std::uint64_t epoch) {
  if (data.empty()) throw DataError("empty manifest");
  std::vector<Batch> out;
  for (const auto &idx : BatchOrder(data.size(), batch_size, seed, epoch))
    out.push_back(AssembleBatch(data, idx, seg_frames));
  return out;
}

}  // namespace dlid
