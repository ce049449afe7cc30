// Copyright 2026 The mfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFC_JSON_UTIL_H_
#define MFC_JSON_UTIL_H_

#include <initializer_list>
#include <string>

#include "json.hpp"
#include "mfc/error.h"

namespace mfc {

// Rejects any key not in `allowed`; typos in configs must not pass silently.
inline void check_keys(const nlohmann::json& obj,
                       std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::kConfigError, where + " must be an object");
  }
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) {
      throw Error(ErrorKind::kConfigError,
                  "unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <class T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError,
                std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace mfc

#endif  // MFC_JSON_UTIL_H_
