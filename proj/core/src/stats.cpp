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

#include "qbf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "qbf/errors.hpp"
#include "qbf/run.hpp"

namespace qbf {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double x = static_cast<double>(successes);
  const double z2 = z * z;
  const double center = (x + z2 / 2.0) / (n + z2);
  const double half = z * std::sqrt(x * (n - x) / n + z2 / 4.0) / (n + z2);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double z_for_confidence(double confidence) {
  boost::math::normal_distribution<double> nd;
  return boost::math::quantile(nd, 1.0 - (1.0 - confidence) / 2.0);
}

double RunStats::flips_mean() const {
  const std::uint64_t n = trials + exhausted;
  return n ? static_cast<double>(ledger.total()) / static_cast<double>(n) : 0.0;
}

namespace {

void run_block(const TrialFn& trial, std::uint64_t begin, std::uint64_t end, const RandomStream& stream,
               std::uint64_t budget, RunStats& out) {
  for (std::uint64_t i = begin; i < end; ++i) {
    SamplingContext ctx(stream.substream(i), budget);
    try {
      const bool heads = trial(ctx);
      ++out.trials;
      if (heads) ++out.heads;
      out.ledger.merge(ctx.ledger());
    } catch (const BudgetExhausted& e) {
      ++out.exhausted;
      out.ledger.merge(e.partial_ledger());
    }
  }
}

}  // namespace

RunStats estimate_trials(const TrialFn& trial, std::uint64_t trials, const RandomStream& stream,
                         const EstimateOptions& opt) {
  if (trials == 0) throw ConfigError("trials must be >= 1");
  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(std::min<std::uint64_t>(trials, 256))));
  std::vector<RunStats> parts(threads);
  if (threads == 1) {
    run_block(trial, 0, trials, stream, opt.budget, parts[0]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t b = trials * t / threads;
      const std::uint64_t e = trials * (t + 1) / threads;
      pool.emplace_back([&, t, b, e] {
        try {
          run_block(trial, b, e, stream, opt.budget, parts[t]);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  RunStats out;
  for (const auto& part : parts) {
    out.trials += part.trials;
    out.heads += part.heads;
    out.exhausted += part.exhausted;
    out.ledger.merge(part.ledger);
  }
  out.z = opt.z;
  const Interval w = wilson_interval(out.heads, out.trials, opt.z);
  out.wilson_low = w.low;
  out.wilson_high = w.high;
  return out;
}

RunStats estimate_bias(const Protocol& protocol, const HiddenBias& bias, std::uint64_t trials,
                       const RandomStream& stream, const EstimateOptions& opt) {
  return estimate_trials([&](SamplingContext& ctx) { return run(protocol, bias, ctx); }, trials, stream, opt);
}

TestReport two_proportion_test(std::uint64_t heads_a, std::uint64_t trials_a, std::uint64_t heads_b,
                               std::uint64_t trials_b, double alpha) {
  TestReport r;
  r.name = "two-proportion z";
  r.alpha = alpha;
  if (trials_a == 0 || trials_b == 0) throw ConfigError("two-proportion test needs trials on both sides");
  const double na = static_cast<double>(trials_a), nb = static_cast<double>(trials_b);
  const double pa = static_cast<double>(heads_a) / na, pb = static_cast<double>(heads_b) / nb;
  const double pooled = static_cast<double>(heads_a + heads_b) / (na + nb);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  if (se == 0.0) {
    r.statistic = pa == pb ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.statistic = (pa - pb) / se;
  }
  r.p_value = std::erfc(std::fabs(r.statistic) / std::sqrt(2.0));
  r.reject = r.p_value < alpha;
  return r;
}

TestReport agreement_test(const Protocol& a, const Protocol& b, const HiddenBias& bias, std::uint64_t trials,
                          const RandomStream& stream_a, const RandomStream& stream_b, double alpha) {
  const RunStats sa = estimate_bias(a, bias, trials, stream_a);
  const RunStats sb = estimate_bias(b, bias, trials, stream_b);
  TestReport r = two_proportion_test(sa.heads, sa.trials, sb.heads, sb.trials, alpha);
  if (sa.exhausted || sb.exhausted) r.note = "budget exhaustion present";
  return r;
}

BellReport chi_square_bell(double p, std::uint64_t trials, const RandomStream& stream, double alpha) {
  if (trials == 0) throw ConfigError("trials must be >= 1");
  BellReport r;
  r.alpha = alpha;
  r.expected = bell_probabilities(p);
  const HiddenBias bias(p);
  SamplingContext ctx(stream, kUnlimitedBudget);
  for (std::uint64_t i = 0; i < trials; ++i) ++r.counts[static_cast<std::size_t>(bell_measure(bias, ctx))];
  const double n = static_cast<double>(trials);
  int cells = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    const double e = r.expected[c] * n;
    if (r.expected[c] == 0.0) {
      if (r.counts[c] > 0) r.impossible_seen = true;
      continue;
    }
    ++cells;
    const double d = static_cast<double>(r.counts[c]) - e;
    r.chi_square += d * d / e;
  }
  if (r.counts[static_cast<std::size_t>(BellOutcome::PsiMinus)] > 0) r.impossible_seen = true;
  r.dof = std::max(0, cells - 1);
  r.p_value = r.dof > 0 ? boost::math::gamma_q(r.dof / 2.0, r.chi_square / 2.0) : 1.0;
  r.pass = !r.impossible_seen && r.p_value >= alpha;
  return r;
}

double binomial_upper_tail(std::uint64_t x, std::uint64_t n, double q) {
  if (x == 0) return 1.0;
  if (x > n) return 0.0;
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  return boost::math::ibeta(static_cast<double>(x), static_cast<double>(n - x + 1), q);
}

}  // namespace qbf
