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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qbf/sampling_context.hpp"

namespace qbf {

// A probability in [0,1] given by a lazily produced binary expansion.
class KnownProbability {
 public:
  // Digit i (1-based) of the expansion; called with i = 1, 2, ... in order.
  using DigitFn = std::function<int(std::size_t)>;

  // The exact dyadic rational a finite double denotes.
  static KnownProbability dyadic(double q);
  static KnownProbability rational(std::uint64_t num, std::uint64_t den);
  // A producer with no known termination. Exceptions it throws surface as SamplerError.
  static KnownProbability from_digits(DigitFn digits, double approx);

  // Sequential reader over the digits.
  class Cursor {
   public:
    explicit Cursor(const KnownProbability& q);
    int next();
    // True once every digit after the last one read is zero.
    bool rest_zero() const;

   private:
    const KnownProbability* q_;
    std::size_t pos_ = 0;
    std::uint64_t rem_ = 0;  // rational long-division remainder
  };

  bool is_one() const noexcept { return one_; }
  bool is_zero() const noexcept;
  double approx() const noexcept { return approx_; }

 private:
  enum class Kind { Dyadic, Rational, Digits };
  Kind kind_ = Kind::Dyadic;
  bool one_ = false;
  double approx_ = 0.0;
  std::uint64_t mant_ = 0;  // dyadic: q = mant * 2^exp2
  int exp2_ = 0;
  std::uint64_t num_ = 0, den_ = 1;
  std::shared_ptr<DigitFn> digits_;
};

// A uniform on [0,1) whose bits are revealed on demand as counted fair bits.
class LazyUniform {
 public:
  explicit LazyUniform(SamplingContext& ctx) : ctx_(&ctx) {}

  // Decides U < q, revealing only as many bits as needed.
  bool less_than(const KnownProbability& q);

  // Bit i (1-based), revealing it if necessary.
  bool bit(std::size_t i);
  std::size_t revealed() const noexcept { return bits_.size(); }

 private:
  SamplingContext* ctx_;
  std::vector<bool> bits_;
};

// Returns 1 with probability exactly q. q = 0 and q = 1 still read one bit.
bool bernoulli_known(const KnownProbability& q, SamplingContext& ctx);

}  // namespace qbf
