// include/dlid/keyed-rng.h

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

#ifndef DLID_KEYED_RNG_H_
#define DLID_KEYED_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace dlid {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; used to key streams by utterance id.
inline std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based random stream: the i-th output is a pure function of
/// (key, i), and the key is derived from a seed plus any number of
/// sub-keys (epoch, utterance id hash, ...).  Two streams with the same keys
/// produce the same sequence regardless of what else was drawn elsewhere.
/// Satisfies UniformRandomBitGenerator, so the std distributions draw from it.
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  explicit KeyedStream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {})
      : key_(SplitMix64(seed)) {
    for (std::uint64_t k : keys) key_ = SplitMix64(key_ ^ SplitMix64(k));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return SplitMix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dlid

#endif  // DLID_KEYED_RNG_H_
