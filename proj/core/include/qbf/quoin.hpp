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
#include <string_view>

#include "qbf/sampling_context.hpp"

namespace qbf {

class HiddenBias;
class RotationParam;

enum class BellOutcome : std::uint8_t { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

std::string_view bell_label(BellOutcome o);

// Result of a post-selected Bell run: Psi+ outcomes seen before the first Phi-,
// and whether a Phi- ended the run.
struct PostselectRun {
  std::uint64_t heads = 0;
  bool tails = false;
};

// Outcome 0 ("heads") with probability p; one quoin.
int measure_quoin(const HiddenBias& bias, SamplingContext& ctx);
// Classical p-coin: true (heads) with probability p.
bool p_coin(const HiddenBias& bias, SamplingContext& ctx);
// 1 with probability h_a(p); one h-coin(a).
int h_coin(const RotationParam& a, const HiddenBias& bias, SamplingContext& ctx);
// One Bell-basis measurement on two fresh quoins.
BellOutcome bell_measure(const HiddenBias& bias, SamplingContext& ctx);
// Repeats Bell measurements, ignoring Phi+, until a Phi- or until `max_heads`
// Psi+ outcomes. Each round costs two quoins.
PostselectRun bell_postselect_run(const HiddenBias& bias, SamplingContext& ctx, std::uint64_t max_heads);

// The unknown coin parameter. Only the measurement functions above can read it.
class HiddenBias {
 public:
  explicit HiddenBias(double p);

 private:
  double p_;
  friend int measure_quoin(const HiddenBias&, SamplingContext&);
  friend bool p_coin(const HiddenBias&, SamplingContext&);
  friend int h_coin(const RotationParam&, const HiddenBias&, SamplingContext&);
  friend BellOutcome bell_measure(const HiddenBias&, SamplingContext&);
  friend PostselectRun bell_postselect_run(const HiddenBias&, SamplingContext&, std::uint64_t);
};

class RotationParam {
 public:
  explicit RotationParam(double a);
  double value() const noexcept { return a_; }

 private:
  double a_;
};

// h_a(p) = (sqrt(p(1-a)) - sqrt(a(1-p)))^2
double h_bias(double a, double p);
// 4p(1-p)
double g1_bias(double p);
// (Phi+, Phi-, Psi+, Psi-) probabilities for two quoins of parameter p.
std::array<double, 4> bell_probabilities(double p);

}  // namespace qbf
