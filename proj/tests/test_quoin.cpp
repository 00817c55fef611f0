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

#include <gtest/gtest.h>

#include "frozen.hpp"
#include "qbf/quoin.hpp"
#include "qbf/stats.hpp"

namespace qbf {
namespace {

using testing::frozen;

bool within(std::uint64_t hits, std::uint64_t n, double q) {
  const Interval ci = wilson_interval(hits, n, kFourSigma);
  return ci.low <= q && q <= ci.high;
}

TEST(Quoin, MeasurementIsAPCoin) {
  SamplingContext ctx(RandomStream(11, 0), kUnlimitedBudget);
  const HiddenBias bias(0.3);
  const std::uint64_t n = 100000;
  std::uint64_t zeros = 0;
  for (std::uint64_t i = 0; i < n; ++i) zeros += measure_quoin(bias, ctx) == 0;
  EXPECT_TRUE(within(zeros, n, 0.3));
  EXPECT_EQ(ctx.ledger().count(ResourceKind::Quoin), n);
  EXPECT_EQ(ctx.ledger().total(), n);
}

TEST(Quoin, HBiasReference) {
  EXPECT_NEAR(h_bias(0.25, 0.75), frozen().at("h_quarter_at_three_quarters").get<double>(), 1e-15);
  EXPECT_NEAR(h_bias(0.5, 0.3), frozen().at("h_half_at_0.3").get<double>(), 1e-15);
  EXPECT_EQ(h_bias(0.0, 0.4), 0.4);
  EXPECT_NEAR(h_bias(0.4, 0.4), 0.0, 1e-17);
}

TEST(Quoin, HCoinFrequencyAndLedger) {
  SamplingContext ctx(RandomStream(12, 0), kUnlimitedBudget);
  const HiddenBias bias(0.75);
  const RotationParam a(0.25);
  const std::uint64_t n = 100000;
  std::uint64_t ones = 0;
  for (std::uint64_t i = 0; i < n; ++i) ones += h_coin(a, bias, ctx) == 1;
  EXPECT_TRUE(within(ones, n, h_bias(0.25, 0.75)));
  EXPECT_EQ(ctx.ledger().h_count(0.25), n);
}

TEST(Bell, ProbabilitiesReference) {
  for (const auto& [key, v] : frozen().at("bell").items()) {
    const auto pr = bell_probabilities(std::stod(key));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(pr[i], v[i].get<double>(), 1e-15) << key;
  }
}

TEST(Bell, NeverPsiMinus) {
  SamplingContext ctx(RandomStream(13, 0), kUnlimitedBudget);
  for (double p : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    const HiddenBias bias(p);
    for (int i = 0; i < 20000; ++i) EXPECT_NE(bell_measure(bias, ctx), BellOutcome::PsiMinus);
  }
  EXPECT_EQ(ctx.ledger().count(ResourceKind::Quoin), 5u * 20000u * 2u);
}

TEST(Bell, ChiSquarePasses) {
  const auto rep = chi_square_bell(0.3, 20000, RandomStream(14, 0));
  EXPECT_TRUE(rep.pass) << rep.chi_square;
  EXPECT_FALSE(rep.impossible_seen);
}

TEST(Bell, PostselectGivesG1) {
  SamplingContext ctx(RandomStream(15, 0), kUnlimitedBudget);
  const HiddenBias bias(0.3);
  const std::uint64_t n = 50000;
  std::uint64_t heads = 0;
  for (std::uint64_t i = 0; i < n; ++i) heads += !bell_postselect_run(bias, ctx, 1).tails;
  EXPECT_TRUE(within(heads, n, frozen().at("g1_0.3").get<double>()));
}

}  // namespace
}  // namespace qbf
