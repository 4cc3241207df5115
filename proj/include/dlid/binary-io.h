// include/dlid/binary-io.h

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

#ifndef DLID_BINARY_IO_H_
#define DLID_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "dlid/errors.h"

namespace dlid {

// Little-endian encoders, independent of host byte order.
inline void PutU32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutF32(std::string &out, float f) { PutU32(out, std::bit_cast<std::uint32_t>(f)); }

/// Bounds-checked little-endian reader over a byte buffer.  Running off the
/// end throws DataError("<what>: truncated ...").
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  float F32() { return std::bit_cast<float>(U32()); }

  std::string_view Bytes(std::size_t n) {
    Need(n);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw DataError(what_ + ": truncated (need " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", have " + std::to_string(bytes_.size() - pos_) +
                      ")");
  }

  std::string_view bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string ReadFileBytes(const std::string &path);
void WriteFileBytes(const std::string &path, std::string_view bytes);

}  // namespace dlid

#endif  // DLID_BINARY_IO_H_
