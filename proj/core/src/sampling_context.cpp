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

#include "qbf/sampling_context.hpp"

#include <cmath>
#include <string>

#include "qbf/errors.hpp"

namespace qbf {

SamplingContext::SamplingContext(RandomStream stream, std::uint64_t budget)
    : stream_(stream), budget_(budget) {}

void SamplingContext::reserve(std::uint64_t n) {
  if (n > budget_ - used_) {
    throw BudgetExhausted("raw-sample budget of " + std::to_string(budget_) + " exhausted", ledger_);
  }
  used_ += n;
}

void SamplingContext::charge(ResourceKind kind, std::uint64_t n) {
  reserve(n);
  ledger_.add(kind, n);
}

void SamplingContext::charge_h(double a, std::uint64_t n) {
  reserve(n);
  ledger_.add_h(a, n);
}

bool SamplingContext::fair_bit() {
  charge(ResourceKind::FairBit);
  return stream_.next_bit();
}

namespace {

// 64-bit chunk c of the expansion of mant * 2^s, and whether the expansion ends there.
struct Chunk {
  std::uint64_t bits;
  bool rest_zero;
};

Chunk dyadic_chunk(std::uint64_t mant, int s, int c) {
  const int sh = s + 64 * (c + 1);
  if (sh >= 0) return {sh >= 64 ? 0 : (mant << sh), true};
  const int r = -sh;
  if (r >= 64) return {0, mant == 0};
  return {mant >> r, (mant & ((std::uint64_t{1} << r) - 1)) == 0};
}

}  // namespace

bool bernoulli_dyadic_raw(double q, SamplingContext& ctx) {
  if (!(q > 0.0)) return false;
  if (q >= 1.0) return true;
  int e = 0;
  const double f = std::frexp(q, &e);
  const auto mant = static_cast<std::uint64_t>(std::ldexp(f, 53));
  const int s = e - 53;
  for (int c = 0;; ++c) {
    const Chunk ch = dyadic_chunk(mant, s, c);
    const std::uint64_t u = ctx.raw_word();
    if (u < ch.bits) return true;
    if (u > ch.bits || ch.rest_zero) return false;
  }
}

}  // namespace qbf
