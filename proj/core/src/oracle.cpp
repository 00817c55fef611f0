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

#include "qbf/oracle.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <variant>

#include "qbf/errors.hpp"
#include "qbf/quoin.hpp"

namespace qbf {

namespace {

constexpr std::uint32_t kMaxBernsteinFlips = 24;
constexpr std::uint64_t kMaxTraceLength = 10'000'000;

double heads_prob(const Protocol& protocol, double p);

// k sequential runs stop at the first tails; only the trace H^k is heads.
double all_heads_trace(double x, std::uint64_t k) {
  if (k > kMaxTraceLength) throw UnsupportedStructure("all-of-k trace too long to enumerate");
  double w = 1.0;
  for (std::uint64_t j = 0; j < k; ++j) w *= x;
  return w;
}

double decided_ratio(double heads, double tails, const char* what) {
  if (!(heads + tails > 0.0)) throw UnsupportedStructure(std::string(what) + " never decides at this p");
  return heads / (heads + tails);
}

struct Enumerator {
  double p;

  double operator()(const Primitive& prim) const {
    switch (prim.source) {
      case Source::PCoin:
      case Source::Quoin: return p;
      case Source::HCoin: return h_bias(prim.a, p);
      case Source::FairBit: return 0.5;
      case Source::Constant: return prim.value ? 1.0 : 0.0;
      case Source::Known: return prim.q;
    }
    return 0.0;
  }

  double operator()(const Negate& n) const { return 1.0 - heads_prob(n.inner, p); }

  double operator()(const AllOf& a) const { return all_heads_trace(heads_prob(a.inner, p), a.k); }

  double operator()(const Mix& m) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m.branches.size(); ++i)
      s += m.weights.weight(i + 1) * heads_prob(m.branches[i], p);
    return s;
  }

  double operator()(const Retry& r) const {
    if (r.round == RoundKind::BellPostselect) {
      // One round: Psi+ decides heads, Phi- decides tails, the rest repeat.
      const auto t = bell_probabilities(p);
      return decided_ratio(t[static_cast<int>(BellOutcome::PsiPlus)], t[static_cast<int>(BellOutcome::PhiMinus)],
                           "bell post-selection");
    }
    const double x = heads_prob(r.inner, p);
    // Round traces HH, HT, TH, TT; the second value is the output when they differ.
    const double th = (1.0 - x) * x;
    const double ht = x * (1.0 - x);
    return decided_ratio(th, ht, "pair-differ");
  }

  double operator()(const Ladder&) const {
    throw UnsupportedStructure("ladder walk is unbounded and not geometric");
  }

  double operator()(const Series& s) const {
    const double x = heads_prob(s.inner, p);
    switch (s.weights.family()) {
      case WeightSequence::Family::Finite: {
        double acc = 0.0;
        const auto& w = s.weights.finite_weights();
        for (std::size_t k = 1; k <= w.size(); ++k) acc += w[k - 1] * all_heads_trace(x, k);
        return acc;
      }
      case WeightSequence::Family::Geometric: {
        // sum_k (1-r) r^(k-1) x^k
        const double r = s.weights.ratio();
        return (1.0 - r) * x / (1.0 - r * x);
      }
      case WeightSequence::Family::Qk: break;
    }
    throw UnsupportedStructure("series over q_k weights has no finite trace enumeration");
  }

  double operator()(const Bernstein& b) const {
    if (b.n > kMaxBernsteinFlips) throw UnsupportedStructure("bernstein node too wide to enumerate");
    const std::uint64_t total = std::uint64_t{1} << b.n;
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      const int heads = std::popcount(mask);
      double w = 1.0;
      for (std::uint32_t i = 0; i < b.n; ++i) w *= ((mask >> i) & 1u) ? p : (1.0 - p);
      acc += w * bernstein_threshold(b.mode, b.values[static_cast<std::size_t>(heads)]);
    }
    return acc;
  }
};

double heads_prob(const Protocol& protocol, double p) { return std::visit(Enumerator{p}, protocol.node().v); }

}  // namespace

double exact_prob_enum(const Protocol& protocol, double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw ConfigError("p must lie in [0,1]");
  return heads_prob(protocol, p);
}

}  // namespace qbf
