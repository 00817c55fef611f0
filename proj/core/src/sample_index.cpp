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

#include "qbf/sample_index.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qbf/errors.hpp"

namespace qbf {

namespace {

constexpr std::uint64_t kQkTable = 4096;
constexpr std::uint64_t kIndexCap = std::uint64_t{1} << 62;

const std::vector<long double>& qk_table() {
  static const std::vector<long double> table = [] {
    std::vector<long double> t(kQkTable + 1);
    t[0] = 1.0L;
    for (std::uint64_t j = 1; j <= kQkTable; ++j)
      t[j] = t[j - 1] * static_cast<long double>(2 * j - 1) / static_cast<long double>(2 * j);
    return t;
  }();
  return table;
}

}  // namespace

long double qk_tail(std::uint64_t k) {
  if (k <= kQkTable) return qk_table()[k];
  const long double x = static_cast<long double>(k);
  const long double ix = 1.0L / x;
  const long double series =
      1.0L + ix * (-1.0L / 8 + ix * (1.0L / 128 + ix * (5.0L / 1024 + ix * (-21.0L / 32768))));
  return series / std::sqrt(static_cast<long double>(M_PI) * x);
}

WeightSequence WeightSequence::finite(std::vector<double> weights, double tol) {
  if (weights.empty()) throw ConfigError("weight list is empty");
  long double sum = 0.0L;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("weights must be finite and non-negative");
    sum += w;
  }
  if (sum > 1.0L + tol) throw ConfigError("weights sum to " + std::to_string(static_cast<double>(sum)) + " > 1");
  WeightSequence s;
  s.family_ = Family::Finite;
  s.tails_.assign(weights.size() + 1, 0.0L);
  long double acc = 0.0L;
  for (std::size_t k = weights.size(); k-- > 0;) {
    s.tails_[k] = acc + weights[k];
    acc = s.tails_[k];
  }
  s.tails_[0] = 1.0L;
  s.w_ = std::move(weights);
  return s;
}

WeightSequence WeightSequence::qk() {
  WeightSequence s;
  s.family_ = Family::Qk;
  return s;
}

WeightSequence WeightSequence::geometric(double r) {
  if (!(r >= 0.0 && r < 1.0)) throw ConfigError("geometric ratio must lie in [0,1)");
  WeightSequence s;
  s.family_ = Family::Geometric;
  s.r_ = r;
  return s;
}

std::optional<std::uint64_t> WeightSequence::size() const {
  if (family_ == Family::Finite) return w_.size();
  return std::nullopt;
}

long double WeightSequence::tail(std::uint64_t k) const {
  if (k == 0) return 1.0L;
  switch (family_) {
    case Family::Finite: return k < tails_.size() ? tails_[k] : 0.0L;
    case Family::Qk: return qk_tail(k);
    case Family::Geometric:
      if (r_ == 0.5) return std::ldexp(1.0L, -static_cast<int>(std::min<std::uint64_t>(k, 20000)));
      return std::pow(static_cast<long double>(r_), static_cast<long double>(k));
  }
  return 0.0L;
}

double WeightSequence::weight(std::uint64_t k) const {
  if (k == 0) return 0.0;
  if (family_ == Family::Finite) return k <= w_.size() ? w_[k - 1] : 0.0;
  return static_cast<double>(tail(k - 1) - tail(k));
}

std::uint64_t WeightSequence::first_below(long double v) const {
  if (family_ == Family::Finite) {
    for (std::uint64_t k = 1; k < tails_.size(); ++k)
      if (tails_[k] <= v) return k;
    return w_.size();
  }
  std::uint64_t hi = 1;
  while (tail(hi) > v) {
    if (hi >= kIndexCap) return kIndexCap;
    hi *= 2;
  }
  std::uint64_t lo = hi / 2;  // tail(lo) > v, or lo == 0
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (tail(mid) <= v)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::uint64_t sample_index(const WeightSequence& weights, SamplingContext& ctx) {
  // V = 1 - U lies in (lo, lo + 2^-j]; the index is the k with T(k) < V <= T(k-1).
  long double lo = 0.0L;
  int j = 0;
  int significant = 0;
  for (;;) {
    const long double hi = lo + std::ldexp(1.0L, -j);
    if (lo > 0.0L || weights.size() || weights.tail(1) == 0.0L) {
      const std::uint64_t k = weights.first_below(lo);
      if (hi <= weights.tail(k - 1) || significant >= 64 || j >= 16000) return k;
    }
    ++j;
    const bool b = ctx.fair_bit();
    if (b) lo += std::ldexp(1.0L, -j);
    if (significant > 0 || b) ++significant;
  }
}

}  // namespace qbf
