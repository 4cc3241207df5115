// include/dlid/dataset.h

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

#ifndef DLID_DATASET_H_
#define DLID_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dlid/feature-io.h"
#include "dlid/masking.h"
#include "dlid/tensor.h"

namespace dlid {

struct Utterance {
  std::string id;
  int label = 0;
  std::shared_ptr<const Tensor<float>> feats;  // shared by clip copies
  std::size_t frames = 0;                      // usable prefix length
};

// Loads every record, resolving paths against the manifest directory.
// Records pointing at the same file share one feature matrix.  Throws
// DataError for unknown languages, header/manifest frame mismatches, a wrong
// feature dimension, or utterances shorter than one segment.
std::vector<Utterance> LoadDataset(const std::vector<ManifestRecord> &records,
                                   const std::string &base_dir,
                                   const std::vector<std::string> &languages,
                                   std::size_t feat_dim, std::size_t seg_frames);

std::vector<Utterance> LoadDataset(const std::string &manifest_path,
                                   const std::vector<std::string> &languages,
                                   std::size_t feat_dim, std::size_t seg_frames);

// Utterance-level counterpart of AugmentWithClips: appends a copy of each
// utterance limited to its first `seconds`, sharing the feature matrix.
std::vector<Utterance> AugmentWithClips(const std::vector<Utterance> &data, double seconds,
                                        std::size_t seg_frames);

/// Zero-padded batch of segmented utterances.
struct Batch {
  Tensor<float> segments;  // B x T_max x K x F
  std::vector<std::size_t> lengths;  // real segments per utterance
  std::vector<AttentionMask> pad_masks;
  std::vector<int> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return lengths.size(); }
  std::size_t t_max() const { return segments.dim(1); }
};

// Epoch-seeded shuffle of [0, n) cut into chunks of batch_size (the last one
// may be smaller).  Pure function of (n, batch_size, seed, epoch).
std::vector<std::vector<std::size_t>> BatchOrder(std::size_t n, std::size_t batch_size,
                                                 std::uint64_t seed, std::uint64_t epoch);

Batch AssembleBatch(const std::vector<Utterance> &data, const std::vector<std::size_t> &indices,
                    std::size_t seg_frames);

// Throws DataError("empty manifest") when data is empty.
std::vector<Batch> MakeBatches(const std::vector<Utterance> &data, std::size_t batch_size,
                               std::size_t seg_frames, std::uint64_t seed, std::uint64_t epoch);

}  // namespace dlid

#endif  // DLID_DATASET_H_
