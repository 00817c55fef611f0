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
#include <functional>
#include <string>

#include "qbf/flip_ledger.hpp"
#include "qbf/protocol.hpp"
#include "qbf/quoin.hpp"
#include "qbf/random_stream.hpp"
#include "qbf/sampling_context.hpp"

namespace qbf {

// z for the 4-sigma pass/fail convention.
inline constexpr double kFourSigma = 4.0;

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z);
// Two-sided z for a given confidence, e.g. 0.99 -> 2.5758.
double z_for_confidence(double confidence);

struct RunStats {
  std::uint64_t trials = 0;     // completed trials
  std::uint64_t heads = 0;
  std::uint64_t exhausted = 0;  // trials stopped by the budget, not in trials/heads
  FlipLedger ledger;            // includes partial ledgers of exhausted trials
  double z = kFourSigma;
  double wilson_low = 0.0;
  double wilson_high = 1.0;

  double estimate() const { return trials ? static_cast<double>(heads) / static_cast<double>(trials) : 0.0; }
  double flips_mean() const;
};

struct EstimateOptions {
  std::uint64_t budget = kDefaultBudget;
  double z = kFourSigma;
  unsigned threads = 1;
};

using TrialFn = std::function<bool(SamplingContext&)>;

// Trial i runs on stream.substream(i), so results do not depend on `threads`.
RunStats estimate_trials(const TrialFn& trial, std::uint64_t trials, const RandomStream& stream,
                         const EstimateOptions& opt = {});
RunStats estimate_bias(const Protocol& protocol, const HiddenBias& bias, std::uint64_t trials,
                       const RandomStream& stream, const EstimateOptions& opt = {});

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.01;
  bool reject = false;
  std::string note;
};

// Pooled two-proportion z-test.
TestReport two_proportion_test(std::uint64_t heads_a, std::uint64_t trials_a, std::uint64_t heads_b,
                               std::uint64_t trials_b, double alpha = 0.01);
TestReport agreement_test(const Protocol& a, const Protocol& b, const HiddenBias& bias, std::uint64_t trials,
                          const RandomStream& stream_a, const RandomStream& stream_b, double alpha = 0.01);

struct BellReport {
  std::array<std::uint64_t, 4> counts{};
  std::array<double, 4> expected{};  // probabilities
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double alpha = 0.01;
  bool impossible_seen = false;  // a zero-probability cell was observed (always includes Psi-)
  bool pass = true;
};

BellReport chi_square_bell(double p, std::uint64_t trials, const RandomStream& stream, double alpha = 0.01);

// P(X >= x) for X ~ Binomial(n, q).
double binomial_upper_tail(std::uint64_t x, std::uint64_t n, double q);

}  // namespace qbf
