// Copyright 2026 The HRCS Lab Authors
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

#include "hrcs/jsonl.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "hrcs/errors.hpp"

namespace hrcs {
namespace {

void emit(const nlohmann::json& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      // nlohmann::json stores objects in a std::map, so iteration is key-sorted.
      out += '{';
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(item.key()).dump();
        out += ':';
        emit(item.value(), out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        emit(v, out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
      break;
  }
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) throw ConfigError("non-finite number in JSON output");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // Keep the token a JSON float so it parses back as a double.
  if (!std::strpbrk(buf, ".eE")) std::strcat(buf, ".0");
  return buf;
}

std::string dump_canonical(const nlohmann::json& j) {
  std::string out;
  emit(j, out);
  return out;
}

}  // namespace hrcs
