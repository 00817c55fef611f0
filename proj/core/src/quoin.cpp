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

#include "qbf/quoin.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qbf/errors.hpp"

namespace qbf {

std::string_view bell_label(BellOutcome o) {
  switch (o) {
    case BellOutcome::PhiPlus: return "phi+";
    case BellOutcome::PhiMinus: return "phi-";
    case BellOutcome::PsiPlus: return "psi+";
    case BellOutcome::PsiMinus: return "psi-";
  }
  return "?";
}

HiddenBias::HiddenBias(double p) : p_(p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw ConfigError("p must lie in [0,1], got " + std::to_string(p));
}

RotationParam::RotationParam(double a) : a_(a) {
  if (!std::isfinite(a) || a < 0.0 || a > 1.0) throw ConfigError("rotation parameter must lie in [0,1], got " + std::to_string(a));
}

double h_bias(double a, double p) {
  // exact at the ends, where the square roots would round
  if (a == 0.0) return p;
  if (a == 1.0) return 1.0 - p;
  const double d = std::sqrt(p * (1.0 - a)) - std::sqrt(a * (1.0 - p));
  return d * d;
}

double g1_bias(double p) { return 4.0 * p * (1.0 - p); }

std::array<double, 4> bell_probabilities(double p) {
  const double s = 2.0 * p - 1.0;
  return {0.5, 0.5 * s * s, 2.0 * p * (1.0 - p), 0.0};
}

int measure_quoin(const HiddenBias& bias, SamplingContext& ctx) {
  ctx.charge(ResourceKind::Quoin);
  return bernoulli_dyadic_raw(bias.p_, ctx) ? 0 : 1;
}

bool p_coin(const HiddenBias& bias, SamplingContext& ctx) {
  ctx.charge(ResourceKind::PCoin);
  return bernoulli_dyadic_raw(bias.p_, ctx);
}

int h_coin(const RotationParam& a, const HiddenBias& bias, SamplingContext& ctx) {
  ctx.charge_h(a.value());
  return bernoulli_dyadic_raw(h_bias(a.value(), bias.p_), ctx) ? 1 : 0;
}

// Phi+ with probability 1/2; otherwise Psi+ with conditional probability 4p(1-p), else Phi-.
BellOutcome bell_measure(const HiddenBias& bias, SamplingContext& ctx) {
  ctx.charge(ResourceKind::Quoin, 2);
  if (!ctx.raw_bit()) return BellOutcome::PhiPlus;
  return bernoulli_dyadic_raw(g1_bias(bias.p_), ctx) ? BellOutcome::PsiPlus : BellOutcome::PhiMinus;
}

PostselectRun bell_postselect_run(const HiddenBias& bias, SamplingContext& ctx, std::uint64_t max_heads) {
  PostselectRun run;
  const double g1 = g1_bias(bias.p_);
  if (g1 == 1.0) {
    // Phi- is impossible, so only the number of rounds is random: count the
    // Phi+ rounds (zero bits) before the max_heads-th decided round (one bit).
    std::uint64_t need = max_heads;
    while (need > 0) {
      const std::uint64_t w = ctx.raw_word();
      const auto ones = static_cast<std::uint64_t>(std::popcount(w));
      if (ones < need) {
        ctx.charge(ResourceKind::Quoin, 2 * 64);
        need -= ones;
        continue;
      }
      std::uint64_t x = w;
      for (std::uint64_t i = 1; i < need; ++i) x &= x - 1;
      const auto rounds = static_cast<std::uint64_t>(std::countr_zero(x)) + 1;
      ctx.charge(ResourceKind::Quoin, 2 * rounds);
      need = 0;
    }
    run.heads = max_heads;
    return run;
  }
  while (run.heads < max_heads) {
    do {
      ctx.charge(ResourceKind::Quoin, 2);
    } while (!ctx.raw_bit());
    if (!bernoulli_dyadic_raw(g1, ctx)) {
      run.tails = true;
      return run;
    }
    ++run.heads;
  }
  return run;
}

}  // namespace qbf
