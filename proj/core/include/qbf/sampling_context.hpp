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

#include <cstdint>
#include <limits>

#include "qbf/flip_ledger.hpp"
#include "qbf/random_stream.hpp"

namespace qbf {

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;
inline constexpr std::uint64_t kUnlimitedBudget = std::numeric_limits<std::uint64_t>::max();

// One trial's randomness, ledger and raw-sample budget. Single owner.
class SamplingContext {
 public:
  explicit SamplingContext(RandomStream stream, std::uint64_t budget = kDefaultBudget);

  // Records n raw samples of `kind`; throws BudgetExhausted if that would pass the budget.
  void charge(ResourceKind kind, std::uint64_t n = 1);
  void charge_h(double a, std::uint64_t n = 1);

  // A counted fair bit.
  bool fair_bit();

  // Uncounted randomness used inside primitive samplers.
  std::uint64_t raw_word() { return stream_.next_u64(); }
  bool raw_bit() { return stream_.next_bit(); }

  RandomStream& stream() noexcept { return stream_; }
  const FlipLedger& ledger() const noexcept { return ledger_; }
  std::uint64_t budget() const noexcept { return budget_; }
  std::uint64_t used() const noexcept { return used_; }
  std::uint64_t remaining() const noexcept { return budget_ - used_; }

 private:
  void reserve(std::uint64_t n);

  RandomStream stream_;
  FlipLedger ledger_;
  std::uint64_t budget_;
  std::uint64_t used_ = 0;
};

// Exact Bernoulli(q) for a double q treated as a dyadic rational, drawing 64-bit
// chunks of uncounted randomness. Used by the raw primitives.
bool bernoulli_dyadic_raw(double q, SamplingContext& ctx);

}  // namespace qbf
