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

#pragma once

#include <nlohmann/json.hpp>

#include <string>

namespace hrcs {

/// Compact single-line JSON with sorted object keys and every floating-point
/// number printed with 17 significant digits.
std::string dump_canonical(const nlohmann::json& j);

/// Formats a double with 17 significant digits ("nan"/"inf" are rejected).
std::string format_double(double x);

}  // namespace hrcs
