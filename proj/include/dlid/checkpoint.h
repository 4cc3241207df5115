// include/dlid/checkpoint.h

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

#ifndef DLID_CHECKPOINT_H_
#define DLID_CHECKPOINT_H_

#include <string>

#include "dlid/model.h"

namespace dlid {

/// Checkpoint layout (all integers u32 little-endian):
///   "DLCK" | version=1 | tensor count
///   per tensor: name length | UTF-8 name | rank | extents[rank] | f32 data
///   JSON length | UTF-8 JSON of the ModelConfig
struct Checkpoint {
  ModelConfig config;
  ModelParams<float> params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string SerializeCheckpoint(const ModelConfig &config, const ModelParams<float> &params);

// Throws DataError on bad magic, unsupported version, truncation or
// trailing bytes; ConfigError if the embedded config is invalid.
Checkpoint ParseCheckpoint(std::string_view bytes, const std::string &what = "checkpoint");

void WriteCheckpoint(const std::string &path, const ModelConfig &config,
                     const ModelParams<float> &params);
Checkpoint ReadCheckpoint(const std::string &path);

}  // namespace dlid

#endif  // DLID_CHECKPOINT_H_
