// src/masking.cc

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

#include "dlid/masking.h"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace dlid {

AttentionMask::AttentionMask(std::vector<std::uint8_t> active) : active_(std::move(active)) {
  for (auto &a : active_) {
    a = a ? 1 : 0;
    num_active_ += a;
  }
  if (num_active_ == 0) throw std::invalid_argument("empty mask");
}

AttentionMask AttentionMask::AllActive(std::size_t length) {
  return AttentionMask(std::vector<std::uint8_t>(length, 1));
}

bool AttentionMask::IsContiguous() const {
  const std::size_t first = FirstActive();
  for (std::size_t i = first; i < first + num_active_; ++i)
    if (!active_[i]) return false;
  return true;
}

std::size_t AttentionMask::FirstActive() const {
  return static_cast<std::size_t>(std::find(active_.begin(), active_.end(), 1) -
                                  active_.begin());
}

std::string AttentionMask::ToString() const {
  std::string s;
  for (auto a : active_) s += a ? 'T' : 'F';
  return s;
}

ClipSpec ClipSpec::FromSeconds(double seconds, ClipLocation location) {
  const auto segments = static_cast<long>(std::lround(seconds * kSegmentsPerSecond));
  if (segments < 1)
    throw std::invalid_argument("clip of " + std::to_string(seconds) +
                                " s is shorter than one segment");
  return ClipSpec{static_cast<std::size_t>(segments), location};
}

AttentionMask PaddingMask(std::size_t length, std::size_t t_max) {
  if (length == 0 || length > t_max)
    throw std::invalid_argument("PaddingMask: length " + std::to_string(length) +
                                " outside [1, " + std::to_string(t_max) + "]");
  std::vector<std::uint8_t> active(t_max, 0);
  std::fill_n(active.begin(), length, 1);
  return AttentionMask(std::move(active));
}

namespace {

AttentionMask RunMask(std::size_t start, std::size_t len, std::size_t t_max) {
  std::vector<std::uint8_t> active(t_max, 0);
  std::fill_n(active.begin() + static_cast<long>(start), len, 1);
  return AttentionMask(std::move(active));
}

void CheckClipArgs(std::size_t utt_len, std::size_t clip_len, std::size_t t_max) {
  if (utt_len == 0 || clip_len == 0)
    throw std::invalid_argument("clip mask: utterance and clip lengths must be >= 1");
  if (t_max < utt_len)
    throw std::invalid_argument("clip mask: t_max " + std::to_string(t_max) +
                                " shorter than utterance " + std::to_string(utt_len));
}

}  // namespace

AttentionMask FixedClipMask(std::size_t utt_len, std::size_t clip_len, std::size_t t_max) {
  if (t_max == 0) t_max = utt_len;
  CheckClipArgs(utt_len, clip_len, t_max);
  return RunMask(0, std::min(clip_len, utt_len), t_max);
}

std::size_t RandomClipStart(std::size_t utt_len, std::size_t clip_len, KeyedStream &rng) {
  if (utt_len <= clip_len) return 0;
  std::uniform_int_distribution<std::size_t> start(0, utt_len - clip_len);
  return start(rng);
}

AttentionMask RandomClipMask(std::size_t utt_len, std::size_t clip_len, KeyedStream &rng,
                             std::size_t t_max) {
  if (t_max == 0) t_max = utt_len;
  CheckClipArgs(utt_len, clip_len, t_max);
  const std::size_t s = RandomClipStart(utt_len, clip_len, rng);
  return RunMask(s, std::min(clip_len, utt_len), t_max);
}

AttentionMask Combine(const AttentionMask &pad, const AttentionMask &clip) {
  if (pad.size() != clip.size())
    throw std::invalid_argument("Combine: mask lengths differ (" +
                                std::to_string(pad.size()) + " vs " +
                                std::to_string(clip.size()) + ")");
  std::vector<std::uint8_t> out(pad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pad[i] && clip[i];
  return AttentionMask(std::move(out));
}

std::vector<std::uint8_t> FlattenMasks(std::span<const AttentionMask> masks) {
  std::vector<std::uint8_t> flat;
  for (const auto &m : masks) flat.insert(flat.end(), m.view().begin(), m.view().end());
  return flat;
}

}  // namespace dlid
