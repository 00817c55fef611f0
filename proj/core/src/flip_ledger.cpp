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

#include "qbf/flip_ledger.hpp"

#include <charconv>
#include <stdexcept>

namespace qbf {

const char* resource_label(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::PCoin: return "p-coin";
    case ResourceKind::Quoin: return "quoin";
    case ResourceKind::FairBit: return "fair-bit";
    case ResourceKind::HCoin: return "h-coin";
  }
  return "?";
}

std::string h_coin_label(double a) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), a);
  (void)ec;
  return "h-coin(" + std::string(buf, ptr) + ")";
}

void FlipLedger::add(ResourceKind kind, std::uint64_t n) {
  if (kind == ResourceKind::HCoin) throw std::invalid_argument("h-coin counts need a rotation parameter");
  fixed_[static_cast<std::size_t>(kind)] += n;
}

void FlipLedger::add_h(double a, std::uint64_t n) {
  for (auto& [key, c] : h_) {
    if (key == a) {
      c += n;
      return;
    }
  }
  h_.emplace_back(a, n);
}

std::uint64_t FlipLedger::count(ResourceKind kind) const {
  if (kind == ResourceKind::HCoin) {
    std::uint64_t s = 0;
    for (const auto& e : h_) s += e.second;
    return s;
  }
  return fixed_[static_cast<std::size_t>(kind)];
}

std::uint64_t FlipLedger::h_count(double a) const {
  for (const auto& [key, c] : h_)
    if (key == a) return c;
  return 0;
}

std::uint64_t FlipLedger::total() const {
  std::uint64_t s = fixed_[0] + fixed_[1] + fixed_[2];
  for (const auto& e : h_) s += e.second;
  return s;
}

void FlipLedger::merge(const FlipLedger& other) {
  for (std::size_t i = 0; i < fixed_.size(); ++i) fixed_[i] += other.fixed_[i];
  for (const auto& [a, c] : other.h_) add_h(a, c);
}

std::map<std::string, std::uint64_t> FlipLedger::counts() const {
  std::map<std::string, std::uint64_t> out;
  for (auto kind : {ResourceKind::PCoin, ResourceKind::Quoin, ResourceKind::FairBit}) {
    const auto c = count(kind);
    if (c) out[resource_label(kind)] = c;
  }
  for (const auto& [a, c] : h_)
    if (c) out[h_coin_label(a)] += c;
  return out;
}

nlohmann::json FlipLedger::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [label, c] : counts()) j[label] = c;
  return j;
}

FlipLedger FlipLedger::from_json(const nlohmann::json& j) {
  FlipLedger l;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto c = it.value().get<std::uint64_t>();
    if (key == "p-coin") {
      l.add(ResourceKind::PCoin, c);
    } else if (key == "quoin") {
      l.add(ResourceKind::Quoin, c);
    } else if (key == "fair-bit") {
      l.add(ResourceKind::FairBit, c);
    } else if (key.rfind("h-coin(", 0) == 0 && key.back() == ')') {
      const std::string num = key.substr(7, key.size() - 8);
      double a = 0.0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), a);
      if (ec != std::errc() || ptr != num.data() + num.size())
        throw std::invalid_argument("bad ledger label: " + key);
      l.add_h(a, c);
    } else {
      throw std::invalid_argument("unknown ledger label: " + key);
    }
  }
  return l;
}

}  // namespace qbf
