// src/checkpoint.cc

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

#include "dlid/checkpoint.h"

#include "dlid/binary-io.h"
#include "dlid/errors.h"

namespace dlid {

std::string SerializeCheckpoint(const ModelConfig &config, const ModelParams<float> &params) {
  std::string out = "DLCK";
  PutU32(out, kCheckpointVersion);
  PutU32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto &[name, t] : params.entries()) {
    PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutU32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) PutU32(out, static_cast<std::uint32_t>(e));
    for (float v : t.values()) PutF32(out, v);
  }
  const std::string json = ToJson(config).dump();
  PutU32(out, static_cast<std::uint32_t>(json.size()));
  out += json;
  return out;
}

Checkpoint ParseCheckpoint(std::string_view bytes, const std::string &what) {
  ByteReader r(bytes, what);
  if (r.remaining() < 4 || r.Bytes(4) != "DLCK") throw DataError(what + ": bad magic");
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion)
    throw DataError(what + ": unsupported version " + std::to_string(version));
  Checkpoint ck;
  const std::uint32_t count = r.U32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.Bytes(r.U32()));
    const std::uint32_t rank = r.U32();
    if (rank == 0 || rank > 8)
      throw DataError(what + ": tensor " + name + " has bad rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto &e : shape) {
      e = r.U32();
      if (e == 0) throw DataError(what + ": tensor " + name + " has a zero extent");
    }
    std::vector<float> data(NumElements(shape));
    if (r.remaining() / 4 < data.size())
      throw DataError(what + ": truncated data for tensor " + name);
    for (float &v : data) v = r.F32();
    ck.params.Add(std::move(name), Tensor<float>(std::move(shape), std::move(data)));
  }
  std::string_view json = r.Bytes(r.U32());
  if (r.remaining() != 0) throw DataError(what + ": trailing bytes after config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception &e) {
    throw DataError(what + ": config JSON: " + e.what());
  }
  ck.config = ModelConfigFromJson(j);
  const ModelParams<float> expected = InitParams<float>(ck.config, 0);
  if (expected.size() != ck.params.size())
    throw DataError(what + ": " + std::to_string(ck.params.size()) +
                    " tensors, config expects " + std::to_string(expected.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto &[name, t] = expected.entries()[i];
    const auto &[got_name, got] = ck.params.entries()[i];
    if (name != got_name || t.shape() != got.shape())
      throw DataError(what + ": tensor " + got_name + " " + ShapeString(got.shape()) +
                      " does not match config (" + name + " " + ShapeString(t.shape()) + ")");
  }
  return ck;
}

void WriteCheckpoint(const std::string &path, const ModelConfig &config,
                     const ModelParams<float> &params) {
  WriteFileBytes(path, SerializeCheckpoint(config, params));
}

Checkpoint ReadCheckpoint(const std::string &path) {
  return ParseCheckpoint(ReadFileBytes(path), path);
}

}  // namespace dlid
