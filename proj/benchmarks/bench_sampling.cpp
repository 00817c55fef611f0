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

#include <benchmark/benchmark.h>

#include "qbf/interval.hpp"
#include "qbf/known_probability.hpp"
#include "qbf/protocol.hpp"
#include "qbf/random_stream.hpp"
#include "qbf/run.hpp"
#include "qbf/sample_index.hpp"
#include "qbf/spb.hpp"

namespace {

using namespace qbf;

void BM_PhiloxWord(benchmark::State& state) {
  RandomStream s(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(s.next_u64());
}
BENCHMARK(BM_PhiloxWord);

void BM_BernoulliKnown(benchmark::State& state) {
  SamplingContext ctx(RandomStream(2, 0), kUnlimitedBudget);
  const auto q = KnownProbability::rational(1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(bernoulli_known(q, ctx));
}
BENCHMARK(BM_BernoulliKnown);

void BM_SampleIndexQk(benchmark::State& state) {
  SamplingContext ctx(RandomStream(3, 0), kUnlimitedBudget);
  const auto w = WeightSequence::qk();
  for (auto _ : state) benchmark::DoNotOptimize(sample_index(w, ctx));
}
BENCHMARK(BM_SampleIndexQk);

// one trial of a protocol at p = 0.25; flips per trial reported as a counter
void BM_Protocol(benchmark::State& state, Protocol proto) {
  SamplingContext ctx(RandomStream(4, 0), kUnlimitedBudget);
  const HiddenBias bias(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(run(proto, bias, ctx));
  state.counters["flips/trial"] =
      benchmark::Counter(static_cast<double>(ctx.ledger().total()), benchmark::Counter::kAvgIterations);
}
BENCHMARK_CAPTURE(BM_Protocol, g1, build::g1());
BENCHMARK_CAPTURE(BM_Protocol, f_wedge_series, build::f_wedge_series());
BENCHMARK_CAPTURE(BM_Protocol, f_wedge_ladder, build::f_wedge_ladder());
BENCHMARK_CAPTURE(BM_Protocol, t_coin_4_3, build::t_coin(4, 3, 0.5));
BENCHMARK_CAPTURE(BM_Protocol, f_alpha, build::f_alpha(0.99, 0.25));

void BM_CoupledDraw(benchmark::State& state) {
  const auto cert = SpbCertificate::from_json(nlohmann::json::parse(
      R"({"f": "(2*p - 1)^2", "lipschitz": 4, "zeros": [{"point": 0.5, "c": 4, "k": 1, "delta": 0.25}],
          "ones": [{"point": 0, "c": 4, "k": 1, "delta": 0.25}, {"point": 1, "c": 4, "k": 1, "delta": 0.25}]})"));
  const BoundingPair pair(cert, search_bounding_params(cert));
  SamplingContext ctx(RandomStream(5, 0), kUnlimitedBudget);
  const HiddenBias bias(0.2);
  for (auto _ : state) benchmark::DoNotOptimize(sample_coupled(pair, bias, ctx));
  state.counters["n"] = static_cast<double>(pair.params().n);
}
BENCHMARK(BM_CoupledDraw);

void BM_Pinpoint(benchmark::State& state) {
  const auto t = PiecewiseTarget::from_json(nlohmann::json::parse(
      R"({"exclusions": [0.5], "extended": [0.5], "k": 1,
          "pieces": [{"interval": [0, 0.5], "f": 0.2}, {"interval": [0.5, 1], "f": 0.8}]})"));
  LazyCover cover(CoverSpec::from_intervals({{0.0, 0.5}, {0.5, 1.0}}, {0.2, 0.8}), t.domain);
  SamplingContext ctx(RandomStream(6, 0), kUnlimitedBudget);
  const HiddenBias bias(0.3);
  const int acc = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pinpoint_interval(cover, acc, bias, ctx));
}
BENCHMARK(BM_Pinpoint)->Arg(1)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
