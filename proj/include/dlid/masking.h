// include/dlid/masking.h

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

#ifndef DLID_MASKING_H_
#define DLID_MASKING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dlid/keyed-rng.h"

namespace dlid {

/// Boolean participation vector over segment positions (true = the segment
/// is attended to and pooled).  Always has at least one active position.
class AttentionMask {
 public:
  // Throws std::invalid_argument("empty mask") if nothing is active.
  explicit AttentionMask(std::vector<std::uint8_t> active);

  static AttentionMask AllActive(std::size_t length);

  std::size_t size() const { return active_.size(); }
  std::size_t num_active() const { return num_active_; }
  bool operator[](std::size_t i) const { return active_[i] != 0; }
  std::span<const std::uint8_t> view() const { return active_; }

  // True iff the active positions form one run.
  bool IsContiguous() const;
  std::size_t FirstActive() const;

  std::string ToString() const;  // e.g. "TTFF"

  friend bool operator==(const AttentionMask &a, const AttentionMask &b) {
    return a.active_ == b.active_;
  }

 private:
  std::vector<std::uint8_t> active_;
  std::size_t num_active_ = 0;
};

enum class ClipLocation { kFixed, kRandom };

/// Length and placement of the mimicked short clip.
struct ClipSpec {
  // 20-frame segments at a 10 ms shift: five segments per second.
  static constexpr std::size_t kSegmentsPerSecond = 5;

  std::size_t length_segments = 15;
  ClipLocation location = ClipLocation::kRandom;

  static ClipSpec FromSeconds(double seconds, ClipLocation location);
};

// First `length` of t_max positions active.
AttentionMask PaddingMask(std::size_t length, std::size_t t_max);

// Active on [0, min(clip_len, utt_len)).  t_max defaults to utt_len.
AttentionMask FixedClipMask(std::size_t utt_len, std::size_t clip_len,
                            std::size_t t_max = 0);

// Start offset drawn uniformly from {0, ..., utt_len - clip_len}; 0 when the
// utterance is no longer than the clip.
std::size_t RandomClipStart(std::size_t utt_len, std::size_t clip_len, KeyedStream &rng);

// Active on [s, s + clip_len) with s = RandomClipStart(...); the whole
// utterance when utt_len <= clip_len.
AttentionMask RandomClipMask(std::size_t utt_len, std::size_t clip_len,
                             KeyedStream &rng, std::size_t t_max = 0);

// Element-wise AND.  Throws std::invalid_argument("empty mask") when the
// result has no active position.
AttentionMask Combine(const AttentionMask &pad, const AttentionMask &clip);

// Concatenates per-utterance masks into the flat B*T layout used by the ops.
std::vector<std::uint8_t> FlattenMasks(std::span<const AttentionMask> masks);

}  // namespace dlid

#endif  // DLID_MASKING_H_
