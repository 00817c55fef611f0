// Copyright 2026 The qbf Authors
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

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace qbf::testing {

// Reference values derived independently by tests/oracle/derive_frozen.py.
inline const nlohmann::json& frozen() {
  static const nlohmann::json j = [] {
    std::ifstream in(QBF_FROZEN_VALUES);
    if (!in) throw std::runtime_error("cannot open " QBF_FROZEN_VALUES);
    return nlohmann::json::parse(in);
  }();
  return j;
}

}  // namespace qbf::testing
