// src/feature-io.cc

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

#include "dlid/feature-io.h"

#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "dlid/binary-io.h"
#include "dlid/errors.h"
#include "dlid/masking.h"

namespace dlid {

std::string EncodeFeatures(const Tensor<float> &feats) {
  if (feats.rank() != 2) throw std::invalid_argument("EncodeFeatures: expected frames x dim");
  std::string out = "FEA1";
  out.reserve(kFeatureHeaderBytes + 4 * feats.size());
  PutU32(out, kFeatureVersion);
  PutU32(out, static_cast<std::uint32_t>(feats.dim(0)));
  PutU32(out, static_cast<std::uint32_t>(feats.dim(1)));
  for (float v : feats.values()) PutF32(out, v);
  return out;
}

Tensor<float> DecodeFeatures(std::string_view bytes, const std::string &what) {
  ByteReader r(bytes, what);
  if (r.Bytes(4) != "FEA1") throw DataError(what + ": bad magic");
  const std::uint32_t version = r.U32();
  if (version != kFeatureVersion)
    throw DataError(what + ": unsupported version " + std::to_string(version));
  const std::size_t frames = r.U32(), dim = r.U32();
  if (frames == 0 || dim == 0) throw DataError(what + ": empty feature matrix");
  const std::size_t expect = frames * dim * 4;
  if (r.remaining() != expect)
    throw DataError(what + ": payload length mismatch (header " + std::to_string(frames) + "x" +
                    std::to_string(dim) + " needs " + std::to_string(expect) + " bytes, found " +
                    std::to_string(r.remaining()) + ")");
  Tensor<float> t({frames, dim});
  for (float &v : t.values()) v = r.F32();
  return t;
}

void WriteFeatures(const std::string &path, const Tensor<float> &feats) {
  WriteFileBytes(path, EncodeFeatures(feats));
}

Tensor<float> ReadFeatures(const std::string &path) {
  return DecodeFeatures(ReadFileBytes(path), path);
}

std::string FormatManifest(const std::vector<ManifestRecord> &records) {
  std::string out;
  for (const ManifestRecord &r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["path"] = r.path;
    j["language"] = r.language;
    j["frames"] = r.frames;
    if (r.trunc_frames) j["trunc_frames"] = *r.trunc_frames;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ManifestRecord> ParseManifest(std::string_view text, const std::string &what) {
  std::vector<ManifestRecord> out;
  std::set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = what + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw DataError(where + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(where + ": expected an object");
    ManifestRecord r;
    try {
      r.id = j.at("id").get<std::string>();
      r.path = j.at("path").get<std::string>();
      r.language = j.at("language").get<std::string>();
      r.frames = j.at("frames").get<std::size_t>();
      if (j.contains("trunc_frames")) r.trunc_frames = j.at("trunc_frames").get<std::size_t>();
    } catch (const nlohmann::json::exception &e) {
      throw DataError(where + ": " + e.what());
    }
    for (const auto &item : j.items())
      if (item.key() != "id" && item.key() != "path" && item.key() != "language" &&
          item.key() != "frames" && item.key() != "trunc_frames")
        throw DataError(where + ": unknown field '" + item.key() + "'");
    if (r.frames == 0) throw DataError(where + ": frames must be positive");
    if (r.trunc_frames && (*r.trunc_frames == 0 || *r.trunc_frames > r.frames))
      throw DataError(where + ": trunc_frames must be in [1, frames]");
    if (!ids.insert(r.id).second) throw DataError(where + ": duplicate id '" + r.id + "'");
    out.push_back(std::move(r));
  }
  return out;
}

void WriteManifest(const std::string &path, const std::vector<ManifestRecord> &records) {
  WriteFileBytes(path, FormatManifest(records));
}

std::vector<ManifestRecord> ReadManifest(const std::string &path) {
  return ParseManifest(ReadFileBytes(path), path);
}

std::vector<ManifestRecord> AugmentWithClips(const std::vector<ManifestRecord> &records,
                                             double seconds, std::size_t seg_frames) {
  const std::size_t clip = ClipSpec::FromSeconds(seconds, ClipLocation::kFixed).length_segments *
                           seg_frames;
  std::ostringstream suffix;
  suffix << "+clip" << seconds << "s";
  std::vector<ManifestRecord> out = records;
  for (const ManifestRecord &r : records) {
    ManifestRecord c = r;
    c.id += suffix.str();
    c.trunc_frames = std::min(r.usable_frames(), clip);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace dlid
