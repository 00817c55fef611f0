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

#include <cmath>
#include <vector>

#include "frozen.hpp"
#include "qbf/errors.hpp"
#include "qbf/expression.hpp"
#include "qbf/flip_ledger.hpp"
#include "qbf/known_probability.hpp"
#include "qbf/random_stream.hpp"
#include "qbf/sample_index.hpp"
#include "qbf/sampling_context.hpp"
#include "qbf/stats.hpp"

namespace qbf {
namespace {

using testing::frozen;

bool within(std::uint64_t hits, std::uint64_t n, double q) {
  const Interval ci = wilson_interval(hits, n, kFourSigma);
  return ci.low <= q && q <= ci.high;
}

TEST(Philox, KnownAnswers) {
  for (const auto& v : frozen().at("philox_kat")) {
    Philox4x32::Counter c{};
    Philox4x32::Key k{};
    for (int i = 0; i < 4; ++i) c[i] = v.at("ctr")[i].get<std::uint32_t>();
    for (int i = 0; i < 2; ++i) k[i] = v.at("key")[i].get<std::uint32_t>();
    const auto out = Philox4x32::generate(c, k);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(out[i], v.at("out")[i].get<std::uint32_t>());
  }
}

TEST(RandomStream, SameSeedSameSequence) {
  RandomStream a(42, 7), b(42, 7), c(43, 7), d(42, 8);
  bool c_differs = false, d_differs = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    c_differs |= x != c.next_u64();
    d_differs |= x != d.next_u64();
  }
  EXPECT_TRUE(c_differs);
  EXPECT_TRUE(d_differs);
}

TEST(RandomStream, SubstreamLeavesParentAlone) {
  RandomStream a(1, 0), b(1, 0);
  const RandomStream s1 = a.substream(3);
  const RandomStream s2 = a.substream(3);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(s1.stream_id(), s2.stream_id());
  EXPECT_NE(a.substream(3).stream_id(), a.substream(4).stream_id());
}

TEST(RandomStream, BitsLookFair) {
  RandomStream s(9, 1);
  std::uint64_t ones = 0;
  const std::uint64_t n = 200000;
  for (std::uint64_t i = 0; i < n; ++i) ones += s.next_bit();
  EXPECT_TRUE(within(ones, n, 0.5));
}

TEST(ParseSeed, DecimalAndHex) {
  EXPECT_EQ(parse_seed("12345"), 12345u);
  EXPECT_EQ(parse_seed("0x2a"), 42u);
  EXPECT_EQ(parse_seed("0XFF"), 255u);
  EXPECT_FALSE(parse_seed("12a"));
  EXPECT_FALSE(parse_seed(""));
  EXPECT_FALSE(parse_seed("0x"));
}

TEST(SamplingContext, BudgetCarriesPartialLedger) {
  SamplingContext ctx(RandomStream(1, 1), 5);
  ctx.charge(ResourceKind::PCoin, 3);
  try {
    ctx.charge(ResourceKind::Quoin, 3);
    FAIL() << "expected BudgetExhausted";
  } catch (const BudgetExhausted& e) {
    EXPECT_EQ(e.partial_ledger().count(ResourceKind::PCoin), 3u);
  }
}

TEST(FlipLedger, MergeAndJson) {
  FlipLedger a, b;
  a.add(ResourceKind::Quoin, 2);
  a.add_h(0.25, 3);
  b.add(ResourceKind::FairBit, 5);
  b.add_h(0.25, 1);
  a.merge(b);
  EXPECT_EQ(a.h_count(0.25), 4u);
  EXPECT_EQ(a.total(), 11u);
  EXPECT_EQ(FlipLedger::from_json(a.to_json()), a);
}

TEST(BernoulliKnown, DyadicFrequency) {
  SamplingContext ctx(RandomStream(3, 3), kUnlimitedBudget);
  const auto q = KnownProbability::dyadic(0.375);
  std::uint64_t hits = 0;
  const std::uint64_t n = 100000;
  for (std::uint64_t i = 0; i < n; ++i) hits += bernoulli_known(q, ctx);
  EXPECT_TRUE(within(hits, n, 0.375));
  EXPECT_EQ(ctx.ledger().count(ResourceKind::FairBit), ctx.ledger().total());
}

TEST(BernoulliKnown, RationalAndEnds) {
  SamplingContext ctx(RandomStream(4, 4), kUnlimitedBudget);
  const auto third = KnownProbability::rational(1, 3);
  std::uint64_t hits = 0;
  const std::uint64_t n = 100000;
  for (std::uint64_t i = 0; i < n; ++i) hits += bernoulli_known(third, ctx);
  EXPECT_TRUE(within(hits, n, 1.0 / 3.0));
  for (int i = 0; i < 100; ++i) {
    EXPECT_FALSE(bernoulli_known(KnownProbability::dyadic(0.0), ctx));
    EXPECT_TRUE(bernoulli_known(KnownProbability::dyadic(1.0), ctx));
  }
}

TEST(BernoulliKnown, TwoBitsOnAverage) {
  SamplingContext ctx(RandomStream(5, 5), kUnlimitedBudget);
  const auto q = KnownProbability::rational(2, 7);
  const int n = 50000;
  for (int i = 0; i < n; ++i) bernoulli_known(q, ctx);
  const double mean = static_cast<double>(ctx.ledger().count(ResourceKind::FairBit)) / n;
  EXPECT_NEAR(mean, 2.0, 0.05);
}

TEST(BernoulliKnown, DigitProducerFailureSurfaces) {
  SamplingContext ctx(RandomStream(6, 6), kUnlimitedBudget);
  const auto bad = KnownProbability::from_digits([](std::size_t) -> int { throw std::runtime_error("boom"); }, 0.5);
  EXPECT_THROW(bernoulli_known(bad, ctx), SamplerError);
}

TEST(SampleIndex, QkTailsMatchReference) {
  const auto& tails = frozen().at("qk_tail");
  for (std::size_t k = 0; k < tails.size(); ++k)
    EXPECT_NEAR(static_cast<double>(qk_tail(k)), tails[k].get<double>(), 1e-15);
  const auto w = WeightSequence::qk();
  const auto& qk = frozen().at("qk");
  for (std::size_t k = 1; k <= qk.size(); ++k) EXPECT_NEAR(w.weight(k), qk[k - 1].get<double>(), 1e-15);
}

TEST(SampleIndex, QkFrequencies) {
  SamplingContext ctx(RandomStream(7, 7), kUnlimitedBudget);
  const auto w = WeightSequence::qk();
  const std::uint64_t n = 100000;
  std::vector<std::uint64_t> counts(4, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto k = sample_index(w, ctx);
    ASSERT_GE(k, 1u);
    if (k <= 3) ++counts[k];
  }
  const auto& qk = frozen().at("qk");
  for (int k = 1; k <= 3; ++k) EXPECT_TRUE(within(counts[k], n, qk[k - 1].get<double>())) << "k=" << k;
}

TEST(SampleIndex, GeometricAndFinite) {
  SamplingContext ctx(RandomStream(8, 8), kUnlimitedBudget);
  const auto g = WeightSequence::geometric(0.75);
  const auto f = WeightSequence::finite({0.5, 0.25, 0.25});
  const std::uint64_t n = 100000;
  std::uint64_t g1 = 0, f3 = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    g1 += sample_index(g, ctx) == 1;
    f3 += sample_index(f, ctx) == 3;
  }
  EXPECT_TRUE(within(g1, n, 0.25));
  EXPECT_TRUE(within(f3, n, 0.25));
}

TEST(SampleIndex, FiniteWeightsAboveOneRejected) {
  EXPECT_THROW(WeightSequence::finite({0.7, 0.5}), ConfigError);
  EXPECT_THROW(WeightSequence::finite({0.5, -0.1}), ConfigError);
}

TEST(Expression, ParsesAndEvaluates) {
  const auto e = Expression::parse("(2*p - 1)^2");
  EXPECT_NEAR(e(0.2), 0.36, 1e-15);
  EXPECT_NEAR(Expression::parse("min(2*p, 1)")(0.7), 1.0, 0.0);
  EXPECT_NEAR(Expression::parse("exp(-1/p)")(0.5), std::exp(-2.0), 1e-15);
  EXPECT_THROW(Expression::parse("2*(p"), ConfigError);
  EXPECT_THROW(Expression::parse("foo(p)"), ConfigError);
}

}  // namespace
}  // namespace qbf
