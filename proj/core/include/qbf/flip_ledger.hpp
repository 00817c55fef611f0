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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace qbf {

enum class ResourceKind : std::uint8_t { PCoin = 0, Quoin = 1, FairBit = 2, HCoin = 3 };

const char* resource_label(ResourceKind kind);

// Label used for h-coin counts, e.g. "h-coin(0.25)". Shortest round-trip form of a.
std::string h_coin_label(double a);

// Per-run resource counts. Merging adds counts.
class FlipLedger {
 public:
  void add(ResourceKind kind, std::uint64_t n = 1);
  void add_h(double a, std::uint64_t n = 1);

  std::uint64_t count(ResourceKind kind) const;
  std::uint64_t h_count(double a) const;
  std::uint64_t total() const;

  void merge(const FlipLedger& other);

  // label -> count, sorted by label; zero entries omitted
  std::map<std::string, std::uint64_t> counts() const;

  nlohmann::json to_json() const;
  static FlipLedger from_json(const nlohmann::json& j);

  friend bool operator==(const FlipLedger& a, const FlipLedger& b) {
    return a.counts() == b.counts();
  }

 private:
  std::array<std::uint64_t, 3> fixed_{};
  std::vector<std::pair<double, std::uint64_t>> h_;
};

}  // namespace qbf
