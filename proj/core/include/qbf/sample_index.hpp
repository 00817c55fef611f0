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
#include <optional>
#include <vector>

#include "qbf/sampling_context.hpp"

namespace qbf {

// Weights w_1, w_2, ... over positive indices, described through tails
// T(k) = w_{k+1} + w_{k+2} + ..., kept in long double so deep tails keep
// their relative precision.
class WeightSequence {
 public:
  enum class Family { Finite, Qk, Geometric };

  // Throws ConfigError on negative weights or a sum above 1 + tol.
  static WeightSequence finite(std::vector<double> weights, double tol = 1e-9);
  // q_k = C(2k,k) / ((2k-1) 4^k).
  static WeightSequence qk();
  // w_k = (1-r) r^(k-1).
  static WeightSequence geometric(double r);

  Family family() const noexcept { return family_; }
  std::optional<std::uint64_t> size() const;
  long double tail(std::uint64_t k) const;
  double weight(std::uint64_t k) const;
  double ratio() const noexcept { return r_; }
  const std::vector<double>& finite_weights() const noexcept { return w_; }

  // Smallest k >= 1 with T(k) <= v.
  std::uint64_t first_below(long double v) const;

 private:
  Family family_ = Family::Finite;
  std::vector<double> w_;
  std::vector<long double> tails_;
  double r_ = 0.0;
};

// Tail of q_k: C(2K,K)/4^K.
long double qk_tail(std::uint64_t k);

// Draws k with probability w_k by lazy inverse-CDF search. Uses counted fair bits.
// The comparison is cut off after 64 significant bits.
std::uint64_t sample_index(const WeightSequence& weights, SamplingContext& ctx);

}  // namespace qbf
