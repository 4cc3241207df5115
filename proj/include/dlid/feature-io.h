// include/dlid/feature-io.h

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

#ifndef DLID_FEATURE_IO_H_
#define DLID_FEATURE_IO_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dlid/tensor.h"

namespace dlid {

/// Feature file: "FEA1" | u32 version=1 | u32 frames | u32 dim, then
/// frames*dim f32 values, all little-endian, row-major.
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

std::string EncodeFeatures(const Tensor<float> &feats);
// Throws DataError: "bad magic", unsupported version, truncated header, or a
// payload whose length disagrees with the header.
Tensor<float> DecodeFeatures(std::string_view bytes, const std::string &what = "features");

void WriteFeatures(const std::string &path, const Tensor<float> &feats);
Tensor<float> ReadFeatures(const std::string &path);

/// One line of a JSON Lines manifest.  `path` is relative to the manifest's
/// directory unless absolute.
struct ManifestRecord {
  std::string id;
  std::string path;
  std::string language;
  std::size_t frames = 0;
  std::optional<std::size_t> trunc_frames;

  // Frames actually used: trunc_frames when present.
  std::size_t usable_frames() const { return trunc_frames.value_or(frames); }
  friend bool operator==(const ManifestRecord &, const ManifestRecord &) = default;
};

std::string FormatManifest(const std::vector<ManifestRecord> &records);
// Throws DataError on malformed lines, missing fields, duplicate ids, zero
// frames or trunc_frames outside [1, frames].
std::vector<ManifestRecord> ParseManifest(std::string_view text, const std::string &what = "manifest");

void WriteManifest(const std::string &path, const std::vector<ManifestRecord> &records);
std::vector<ManifestRecord> ReadManifest(const std::string &path);

// Supplements every record with a copy truncated to the first `seconds`
// (seconds * 5 segments * seg_frames frames, or the whole utterance if
// shorter).  Copies get the id suffix "+clip<seconds>s".  Originals stay.
std::vector<ManifestRecord> AugmentWithClips(const std::vector<ManifestRecord> &records,
                                             double seconds, std::size_t seg_frames);

}  // namespace dlid

#endif  // DLID_FEATURE_IO_H_
