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

#include "qbf/run.hpp"

#include <variant>

#include "qbf/known_probability.hpp"
#include "qbf/sample_index.hpp"

namespace qbf {

namespace {

bool is_bell_retry(const Protocol& p) {
  const auto* r = std::get_if<Retry>(&p.node().v);
  return r != nullptr && r->round == RoundKind::BellPostselect;
}

bool run_all_of(std::uint64_t k, const Protocol& inner, const HiddenBias& bias, SamplingContext& ctx) {
  if (is_bell_retry(inner)) return !bell_postselect_run(bias, ctx, k).tails;
  for (std::uint64_t i = 0; i < k; ++i)
    if (!run(inner, bias, ctx)) return false;
  return true;
}

struct Runner {
  const HiddenBias& bias;
  SamplingContext& ctx;

  bool operator()(const Primitive& p) const {
    switch (p.source) {
      case Source::PCoin: return p_coin(bias, ctx);
      case Source::Quoin: return measure_quoin(bias, ctx) == 0;
      case Source::HCoin: return h_coin(RotationParam(p.a), bias, ctx) == 1;
      case Source::FairBit: return ctx.fair_bit();
      case Source::Constant: return p.value;
      case Source::Known:
        return bernoulli_known(p.den > 0 ? KnownProbability::rational(p.num, p.den) : KnownProbability::dyadic(p.q), ctx);
    }
    return false;
  }

  bool operator()(const Negate& n) const { return !run(n.inner, bias, ctx); }

  bool operator()(const AllOf& a) const { return run_all_of(a.k, a.inner, bias, ctx); }

  bool operator()(const Mix& m) const {
    const std::uint64_t i = sample_index(m.weights, ctx);
    return run(m.branches[i - 1], bias, ctx);
  }

  bool operator()(const Retry& r) const {
    if (r.round == RoundKind::BellPostselect) return !bell_postselect_run(bias, ctx, 1).tails;
    for (;;) {
      const bool first = run(r.inner, bias, ctx);
      const bool second = run(r.inner, bias, ctx);
      if (first != second) return second;
    }
  }

  bool operator()(const Ladder& l) const {
    if (!run(l.step, bias, ctx)) return false;
    std::uint64_t height = 1;
    bool odd = false;
    while (height > 0) {
      if (run(l.step, bias, ctx)) {
        if (ctx.fair_bit())
          ++height;
        else
          --height;
      } else {
        odd = !odd;
      }
    }
    return !odd;
  }

  bool operator()(const Series& s) const {
    const std::uint64_t k = sample_index(s.weights, ctx);
    return run_all_of(k, s.inner, bias, ctx);
  }

  bool operator()(const Bernstein& b) const {
    std::uint32_t heads = 0;
    for (std::uint32_t i = 0; i < b.n; ++i) heads += p_coin(bias, ctx) ? 1u : 0u;
    return bernoulli_known(KnownProbability::dyadic(bernstein_threshold(b.mode, b.values[heads])), ctx);
  }
};

}  // namespace

bool run(const Protocol& protocol, const HiddenBias& bias, SamplingContext& ctx) {
  return std::visit(Runner{bias, ctx}, protocol.node().v);
}

bool von_neumann(const HiddenBias& bias, SamplingContext& ctx) {
  static const Protocol p = build::von_neumann();
  return run(p, bias, ctx);
}

bool power_coin(const Protocol& inner, std::uint64_t k, const HiddenBias& bias, SamplingContext& ctx) {
  return run(build::all_of(k, inner), bias, ctx);
}

bool g1_coin(const HiddenBias& bias, SamplingContext& ctx) { return !bell_postselect_run(bias, ctx, 1).tails; }

std::uint64_t qk_index(SamplingContext& ctx) {
  static const WeightSequence qk = WeightSequence::qk();
  return sample_index(qk, ctx);
}

bool f_wedge_series(const HiddenBias& bias, SamplingContext& ctx) {
  static const Protocol p = build::f_wedge_series();
  return run(p, bias, ctx);
}

bool f_wedge_ladder(const HiddenBias& bias, SamplingContext& ctx) {
  static const Protocol p = build::f_wedge_ladder();
  return run(p, bias, ctx);
}

bool t_coin(std::uint64_t m, std::uint64_t M, const RotationParam& z, const HiddenBias& bias, SamplingContext& ctx) {
  return run(build::t_coin(m, M, z.value()), bias, ctx);
}

bool bernstein_coin(const std::function<double(double)>& f, std::uint32_t n, BernsteinMode mode,
                    const HiddenBias& bias, SamplingContext& ctx) {
  return run(build::bernstein(f, n, mode), bias, ctx);
}

bool convex_mix(const std::vector<double>& weights, const std::vector<Protocol>& protocols,
                const HiddenBias& bias, SamplingContext& ctx) {
  return run(build::mix(weights, protocols), bias, ctx);
}

}  // namespace qbf
