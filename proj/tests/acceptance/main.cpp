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

// Acceptance suite: one PASS/FAIL line per criterion. Criteria 1-9 each write a
// JSON report; criterion 10 reruns them under the same master seed and compares
// the serialized reports byte for byte.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "frozen.hpp"
#include "qbf/closed_form.hpp"
#include "qbf/errors.hpp"
#include "qbf/interval.hpp"
#include "qbf/oracle.hpp"
#include "qbf/protocol.hpp"
#include "qbf/run.hpp"
#include "qbf/spb.hpp"
#include "qbf/stats.hpp"

namespace {

using nlohmann::json;
using namespace qbf;
using qbf::testing::frozen;

constexpr std::uint64_t kMasterSeed = 0x5eed2026;
constexpr std::uint64_t kTrials = 100000;

struct Outcome {
  bool pass = true;
  std::string detail;
  json report = json::object();
};

RandomStream stream(int criterion, std::uint64_t index) {
  return RandomStream(kMasterSeed, derive_stream_id(static_cast<std::uint64_t>(criterion), index));
}

json stats_json(const RunStats& s) {
  return {{"trials", s.trials},        {"heads", s.heads},         {"exhausted", s.exhausted},
          {"ci_low", s.wilson_low},    {"ci_high", s.wilson_high}, {"ledger", s.ledger.to_json()}};
}

bool covers(const RunStats& s, double q) { return s.exhausted == 0 && s.wilson_low <= q && q <= s.wilson_high; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

SpbCertificate square_certificate() {
  return SpbCertificate::from_json(json::parse(R"({"kind": "spb-certificate", "f": "(2*p - 1)^2", "lipschitz": 4,
    "zeros": [{"point": 0.5, "c": 4, "k": 1, "delta": 0.25}],
    "ones": [{"point": 0, "c": 4, "k": 1, "delta": 0.25}, {"point": 1, "c": 4, "k": 1, "delta": 0.25}]})"));
}

SpbCertificate identity_certificate() {
  return SpbCertificate::from_json(json::parse(R"({"kind": "spb-certificate", "f": "p", "lipschitz": 1,
    "zeros": [{"point": 0, "c": 1, "k": 1, "delta": 0.5}], "ones": [{"point": 1, "c": 1, "k": 1, "delta": 0.25}]})"));
}

PiecewiseTarget step_target() {
  return PiecewiseTarget::from_json(json::parse(R"({"kind": "piecewise-target", "exclusions": [0.5],
    "extended": [0.5], "k": 1, "pieces": [{"interval": [0, 0.5], "f": 0.2, "lipschitz": 0},
    {"interval": [0.5, 1], "f": 0.8, "lipschitz": 0}]})"));
}

// 1. f-wedge series: 4-sigma Wilson at four p values, all heads at 1/2.
Outcome criterion1() {
  Outcome o;
  const auto& ref = frozen().at("f_wedge");
  const Protocol proto = build::f_wedge_series();
  std::string worst;
  for (std::size_t i = 0; i < ref.at("p").size(); ++i) {
    const double p = ref.at("p")[i].get<double>();
    const double target = ref.at("value")[i].get<double>();
    // a single series draw can ask for a very long Bell run at p = 1/2
    EstimateOptions eo;
    if (p == 0.5) eo.budget = kUnlimitedBudget;
    const RunStats s = estimate_bias(proto, HiddenBias(p), kTrials, stream(1, i), eo);
    const bool ok = p == 0.5 ? (s.heads == kTrials && s.trials == kTrials) : covers(s, target);
    o.pass = o.pass && ok;
    o.report[fmt("%g", p)] = stats_json(s);
    worst += fmt(" p=%g:%.5f", p, s.estimate());
  }
  o.detail = "estimates" + worst;
  return o;
}

// 2. Series and ladder constructions agree (two-proportion z-test, alpha 0.01).
Outcome criterion2() {
  Outcome o;
  std::string d;
  int i = 0;
  for (double p : {0.1, 0.25, 0.4}) {
    const auto t = agreement_test(build::f_wedge_series(), build::f_wedge_ladder(), HiddenBias(p), kTrials,
                                  stream(2, 2 * i), stream(2, 2 * i + 1), 0.01);
    o.pass = o.pass && !t.reject;
    o.report[fmt("%g", p)] = {{"z", t.statistic}, {"p_value", t.p_value}, {"reject", t.reject}};
    d += fmt(" p=%g:z=%.2f", p, t.statistic);
    ++i;
  }
  o.detail = "z-scores" + d;
  return o;
}

// 3. Bell statistics against (1/2, (2p-1)^2/2, 2p(1-p), 0); no Psi- ever.
Outcome criterion3() {
  Outcome o;
  std::string d;
  int i = 0;
  for (double p : {0.0, 0.3, 0.5, 1.0}) {
    const BellReport r = chi_square_bell(p, kTrials, stream(3, i++), 0.01);
    const bool ok = r.pass && !r.impossible_seen && r.counts[3] == 0;
    o.pass = o.pass && ok;
    o.report[fmt("%g", p)] = {{"counts", r.counts}, {"chi_square", r.chi_square}, {"p_value", r.p_value}};
    d += fmt(" p=%g:chi2=%.2f", p, r.chi_square);
  }
  o.detail = "psi- count 0," + d;
  return o;
}

// 4. Enumeration oracle equals the closed forms at 20 random p per family.
Outcome criterion4() {
  Outcome o;
  struct Case {
    std::string name;
    Protocol proto;
    std::function<double(double)> closed;
  };
  std::vector<Case> cases;
  for (double a : {0.0, 0.25, 0.5})
    cases.push_back({fmt("h(%g)", a), build::h_coin(a), [a](double p) { return closed::h(a, p); }});
  cases.push_back({"g1", build::g1(), [](double p) { return closed::g1(p); }});
  for (std::uint64_t k = 1; k <= 4; ++k) {
    cases.push_back({fmt("p^%g", double(k)), build::all_of(k, build::p_coin()),
                     [k](double p) { return closed::power(p, k); }});
    cases.push_back({fmt("h(1/4)^%g", double(k)), build::all_of(k, build::h_coin(0.25)),
                     [k](double p) { return closed::power(closed::h(0.25, p), k); }});
  }
  for (std::uint64_t m = 1; m <= 4; ++m)
    for (std::uint64_t M = 1; M <= 3; ++M)
      for (double z : {0.0, 0.5, 1.0})
        cases.push_back({fmt("t(%g,%g,%g)", double(m), double(M), z), build::t_coin(m, M, z),
                         [=](double p) { return closed::t(m, M, z, p); }});
  for (std::uint32_t n : {1u, 4u, 10u})
    for (auto mode : {BernsteinMode::A, BernsteinMode::B}) {
      std::vector<double> cst(n + 1, 0.3), id(n + 1);
      for (std::uint32_t j = 0; j <= n; ++j) id[j] = static_cast<double>(j) / n;
      const char* mn = mode == BernsteinMode::A ? "A" : "B";
      cases.push_back({std::string("bern") + mn + "-const-" + std::to_string(n), build::bernstein(n, mode, cst),
                       [=](double p) { return closed::bernstein(cst, mode, p); }});
      cases.push_back({std::string("bern") + mn + "-id-" + std::to_string(n), build::bernstein(n, mode, id),
                       [=](double p) { return closed::bernstein(id, mode, p); }});
    }
  RandomStream rs = stream(4, 0);
  double worst = 0.0;
  std::string worst_case;
  for (const auto& c : cases) {
    for (int i = 0; i < 20; ++i) {
      const double p = static_cast<double>(rs.next_u64() >> 11) * 0x1.0p-53;
      const double diff = std::fabs(exact_prob_enum(c.proto, p) - c.closed(p));
      if (diff > worst) {
        worst = diff;
        worst_case = c.name + fmt(" at p=%.4f", p);
      }
    }
  }
  o.pass = worst <= 1e-12;
  o.report = {{"cases", cases.size()}, {"max_abs_diff", worst}};
  o.detail = fmt("%g families x 20 p, max |diff| %.3g", double(cases.size()), worst) +
             (worst_case.empty() ? "" : " (" + worst_case + ")");
  return o;
}

// 5 and 6 share the chain. The chain is a pure function of the certificate, so
// the replay for criterion 10 reuses the built levels.
struct SpbState {
  std::unique_ptr<GkChain> chain;
  double build_seconds = 0.0;
};

Outcome criterion5(SpbState& st, std::uint64_t& draws_out, std::uint64_t& violations_out) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const SpbCertificate cert = square_certificate();
  const SpbReport vr = verify_spb(cert);
  const SearchResult sr = search_bounding_params_full(cert);

  // grid audit on 10^4 points through the params alone
  double lower_excess = -1.0, upper_deficit = -1.0, max_gap = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double p = i / 9999.0;
    const double f = cert.f(p), l = eval_L(sr.params, cert, p), u = eval_U(sr.params, cert, p);
    lower_excess = std::max(lower_excess, l - f);
    upper_deficit = std::max(upper_deficit, f - u);
    max_gap = std::max(max_gap, u - l);
  }
  const bool audit_ok = vr.pass && lower_excess <= 1e-13 && upper_deficit <= 1e-13 && max_gap < 0.5;

  if (!st.chain) st.chain = std::make_unique<GkChain>(cert);
  GkChain& chain = *st.chain;
  const std::uint64_t draws0 = chain.coupled_draws(), viol0 = chain.nesting_violations();

  bool sample_ok = true;
  std::string d;
  int i = 0;
  const auto& ref = frozen().at("square_target");
  for (std::size_t j = 0; j < ref.at("p").size(); ++j) {
    const double p = ref.at("p")[j].get<double>(), target = ref.at("value")[j].get<double>();
    const HiddenBias bias(p);
    // deep chain levels use more than 10^7 p-coins per g-coin, so no budget here
    const RunStats s = estimate_trials([&](SamplingContext& ctx) { return spb_sample(chain, bias, ctx); }, kTrials,
                                       stream(5, i++), {.budget = kUnlimitedBudget});
    const bool ok = p == 0.5 ? (s.heads == 0 && s.trials == kTrials) : covers(s, target);
    sample_ok = sample_ok && ok;
    o.report[fmt("%g", p)] = stats_json(s);
    d += fmt(" p=%g:%.5f", p, s.estimate());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (st.build_seconds == 0.0) st.build_seconds = secs;

  draws_out = chain.coupled_draws() - draws0;
  violations_out = chain.nesting_violations() - viol0;
  o.pass = audit_ok && sample_ok && st.build_seconds <= 600.0;
  o.report["level1"] = {{"n", sr.params.n}, {"max_gap", max_gap}, {"lower_excess", lower_excess},
                        {"upper_deficit", upper_deficit}};
  o.report["verification"] = vr.pass;
  o.detail = fmt("level-1 n=%g max(U-L)=%.4f,", double(sr.params.n), max_gap) + d +
             fmt(", levels built %g, first run %.0f s", double(chain.built()), st.build_seconds);
  return o;
}

// 6. No l-event without a u-event over at least 10^6 coupled draws.
Outcome criterion6(SpbState& st, std::uint64_t draws, std::uint64_t violations) {
  Outcome o;
  GkChain& chain = *st.chain;
  // top up with direct coupled draws over the first levels and a p grid
  std::uint64_t extra = 0, extra_bad = 0;
  const std::uint64_t need = 1000000;
  std::uint64_t idx = 0;
  while (draws + extra < need) {
    const double p = static_cast<double>(idx % 21) / 20.0;
    const auto& level = chain.level(1 + (idx % 8));
    SamplingContext ctx(stream(6, idx), kUnlimitedBudget);
    const HiddenBias bias(p);
    for (int i = 0; i < 1000; ++i) {
      const CoupledDraw cd = sample_coupled(*level.pair, bias, ctx);
      extra_bad += cd.l_event && !cd.u_event;
      ++extra;
    }
    ++idx;
  }
  const std::uint64_t total = draws + extra, bad = violations + extra_bad;
  o.pass = total >= need && bad == 0;
  o.report = {{"draws_in_sampling", draws}, {"extra_draws", extra}, {"violations", bad}};
  o.detail = fmt("%g coupled draws (%g from criterion 5), %g nesting violations", double(total), double(draws),
                 double(bad));
  return o;
}

// 7. f(p) = p chain partial sum at K = 20.
Outcome criterion7() {
  Outcome o;
  GkChain chain(identity_certificate());
  const double s = chain.partial_sum(20, 0.37);
  const double err = std::fabs(s - 0.37), bound = frozen().at("chain_identity_bound").get<double>();
  o.pass = err <= bound;
  o.report = {{"partial_sum", s}, {"error", err}, {"bound", bound}};
  o.detail = fmt("|S_20 - 0.37| = %.3g, bound %.3g", err, bound);
  return o;
}

// 8. Step target: dyadic sampler bias and pinpoint error rate.
Outcome criterion8() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const PiecewiseTarget target = step_target();
  LazyCover cover(CoverSpec::from_intervals({{0.0, 0.5}, {0.5, 1.0}}, {0.2, 0.8}), target.domain);
  const std::uint64_t reps = 10000;
  std::string d;
  int i = 0;
  for (double p : {0.3, 0.7}) {
    const HiddenBias bias(p);
    const RandomStream root = stream(8, i++);
    std::uint64_t wrong = 0;
    for (std::uint64_t r = 0; r < reps; ++r) {
      SamplingContext ctx(root.substream(r), kUnlimitedBudget);
      wrong += pinpoint_interval(cover, 1, bias, ctx).index != (p < 0.5 ? 0u : 1u);
    }
    const double bound = a_poly(target.domain, p);
    // H0: wrong rate >= a(p); reject when P(X <= wrong) < 0.01
    const double p_lower = 1.0 - binomial_upper_tail(wrong + 1, reps, bound);
    const bool ok = p_lower < 0.01;
    o.pass = o.pass && ok;
    o.report[fmt("pinpoint %g", p)] = {{"wrong", wrong}, {"reps", reps}, {"bound", bound}, {"p_value", p_lower}};
    d += fmt("pinpoint p=%g: %g wrong, a(p)=%.4f; ", p, double(wrong), bound);
  }
  DyadicSampler sampler(target);
  for (double p : {0.3, 0.7}) {
    const HiddenBias bias(p);
    const RunStats s = estimate_trials([&](SamplingContext& ctx) { return sampler.sample(bias, ctx); }, 10000,
                                       stream(8, i++), {.budget = kUnlimitedBudget});
    const bool ok = covers(s, target(p));
    o.pass = o.pass && ok;
    o.report[fmt("dyadic %g", p)] = stats_json(s);
    d += fmt("dyadic p=%g: %.4f; ", p, s.estimate());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.pass = o.pass && secs <= 600.0;
  o.detail = d + fmt("%.0f s", secs);
  return o;
}

// 9. f_alpha = 0.99 h_{1/4}: at most one quoin per trial and O(1) fair bits.
Outcome criterion9() {
  Outcome o;
  const RunStats s = estimate_bias(build::f_alpha(0.99, 0.25), HiddenBias(0.75), kTrials, stream(9, 0));
  const double n = static_cast<double>(s.trials);
  const double quoins = static_cast<double>(s.ledger.count(ResourceKind::Quoin) + s.ledger.h_count(0.25) +
                                            s.ledger.count(ResourceKind::PCoin)) / n;
  const double bits = static_cast<double>(s.ledger.count(ResourceKind::FairBit)) / n;
  const double target = frozen().at("f_alpha_0.99_at_0.75").get<double>();
  o.pass = covers(s, target) && quoins <= 1.0 && bits <= 4.0;
  o.report = stats_json(s);
  o.detail = fmt("estimate %.5f (target %.4f), mean quoins %.4f", s.estimate(), target, quoins) +
             fmt(", mean fair bits %.3f", bits);
  return o;
}

struct Run {
  std::vector<Outcome> outcomes;  // criteria 1..9
  std::vector<double> seconds;
};

template <class F>
Outcome timed(F&& f, double& secs) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
    o.report = {{"exception", e.what()}};
  }
  secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

Run run_all(SpbState& spb, bool print) {
  Run r;
  std::uint64_t draws = 0, viol = 0;
  std::vector<std::function<Outcome()>> fns = {
      criterion1,
      criterion2,
      criterion3,
      criterion4,
      [&] { return criterion5(spb, draws, viol); },
      [&] {
        if (!spb.chain) return Outcome{false, "criterion 5 did not build the chain", json::object()};
        return criterion6(spb, draws, viol);
      },
      criterion7,
      criterion8,
      criterion9,
  };
  for (std::size_t i = 0; i < fns.size(); ++i) {
    double secs = 0.0;
    r.outcomes.push_back(timed(fns[i], secs));
    r.seconds.push_back(secs);
    if (print) {
      std::printf("criterion %zu: %s - %s [%.1f s]\n", i + 1, r.outcomes.back().pass ? "PASS" : "FAIL",
                  r.outcomes.back().detail.c_str(), secs);
      std::fflush(stdout);
    }
  }
  return r;
}

std::string serialize(const Run& r) {
  json j = json::array();
  for (const auto& o : r.outcomes) j.push_back(o.report);
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  std::string report_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--report") report_path = argv[i + 1];

  std::printf("master seed 0x%llx\n", static_cast<unsigned long long>(kMasterSeed));
  SpbState spb;
  const Run first = run_all(spb, true);

  double secs = 0.0;
  std::string a, b;
  const Outcome det = timed(
      [&] {
        Outcome o;
        const Run second = run_all(spb, false);
        a = serialize(first);
        b = serialize(second);
        std::size_t same = 0;
        for (std::size_t i = 0; i < first.outcomes.size(); ++i)
          same += first.outcomes[i].report.dump() == second.outcomes[i].report.dump();
        o.pass = a == b;
        o.detail = fmt("replay of criteria 1-9: %g/%g reports byte-identical (%g bytes)", double(same),
                       double(first.outcomes.size()), double(a.size()));
        return o;
      },
      secs);
  std::printf("criterion 10: %s - %s [%.1f s]\n", det.pass ? "PASS" : "FAIL", det.detail.c_str(), secs);

  if (!report_path.empty() && !a.empty()) {
    std::ofstream out(report_path);
    out << json::parse(a).dump(2) << "\n";
  }

  int failed = det.pass ? 0 : 1;
  for (const auto& o : first.outcomes) failed += o.pass ? 0 : 1;
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
