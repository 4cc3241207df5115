// include/dlid/json-fields.h

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

#ifndef DLID_JSON_FIELDS_H_
#define DLID_JSON_FIELDS_H_

#include <nlohmann/json.hpp>

#include <set>
#include <string>

#include "dlid/errors.h"

namespace dlid {

/// Strict reader over one JSON object: fields are optional, type errors and
/// unknown keys raise ConfigError naming the offending path.
class JsonFields {
 public:
  JsonFields(const nlohmann::json &obj, std::string context)
      : obj_(obj), context_(std::move(context)) {
    if (!obj_.is_object()) throw ConfigError(context_ + ": expected a JSON object");
  }

  bool Has(const std::string &key) const { return obj_.contains(key); }

  template <typename T>
  void Get(const std::string &key, T &out) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    try {
      out = obj_.at(key).template get<T>();
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError(Path(key) + ": " + e.what());
    }
  }

  // Hands a nested object to `fn` and marks the key as consumed.
  template <typename Fn>
  void Nested(const std::string &key, Fn &&fn) {
    if (!obj_.contains(key)) return;
    seen_.insert(key);
    fn(obj_.at(key), Path(key));
  }

  std::string Path(const std::string &key) const {
    return context_.empty() ? key : context_ + "." + key;
  }

  void Finish() const {
    for (const auto &item : obj_.items())
      if (!seen_.count(item.key()))
        throw ConfigError("unknown config key '" + Path(item.key()) + "'");
  }

 private:
  const nlohmann::json &obj_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace dlid

#endif  // DLID_JSON_FIELDS_H_
