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
#include <fstream>
#include <string>
#include <vector>

#include "frozen.hpp"
#include "qbf/closed_form.hpp"
#include "qbf/errors.hpp"
#include "qbf/spb.hpp"
#include "qbf/stats.hpp"

namespace qbf {
namespace {

using testing::frozen;

SpbCertificate load_cert(const std::string& name) {
  std::ifstream in(std::string(QBF_EXAMPLES_DIR) + "/" + name);
  return SpbCertificate::from_json(nlohmann::json::parse(in));
}

SpbCertificate identity_cert() {
  return SpbCertificate::from_json(nlohmann::json::parse(R"({"kind": "spb-certificate", "f": "p", "lipschitz": 1,
    "zeros": [{"point": 0, "c": 1, "k": 1, "delta": 0.5}], "ones": [{"point": 1, "c": 1, "k": 1, "delta": 0.25}]})"));
}

std::vector<double> grid(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

TEST(Spb, ConstantHalfGivesThirds) {
  const auto& ref = frozen().at("const_half_bounds");
  BoundingParams bp;
  bp.n = 4;
  const BoundingPair pair(std::vector<double>(5, 0.5), bp);
  for (double p : {0.0, 0.3, 0.9}) {
    EXPECT_NEAR(pair.lower(p), ref.at("L").get<double>(), 1e-15);
    EXPECT_NEAR(pair.upper(p), ref.at("U").get<double>(), 1e-15);
    EXPECT_NEAR(pair.g(p), ref.at("g").get<double>(), 1e-15);
  }
}

TEST(Spb, HeavisideValue) {
  const Heaviside t{0.0, 2, 1};
  const auto& ref = frozen().at("t_coin_2_1_0");
  EXPECT_NEAR(heaviside_value(t, 0.25), ref.at("value")[0].get<double>(), 1e-15);
}

TEST(Spb, SquareCertificateVerifies) {
  const auto rep = verify_spb(load_cert("square-certificate.json"));
  EXPECT_TRUE(rep.pass) << rep.diagnostic();
}

TEST(Spb, ExponentialZeroFailsConditionThree) {
  const auto rep = verify_spb(load_cert("exp-certificate.json"));
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.diagnostic().find("condition-3"), std::string::npos) << rep.diagnostic();
}

TEST(Spb, OverlappingWindowsRejected) {
  auto j = load_cert("square-certificate.json").to_json();
  j["zeros"][0]["delta"] = 0.6;
  const auto rep = verify_spb(SpbCertificate::from_json(j));
  EXPECT_FALSE(rep.pass);
}

TEST(Spb, CertificateJsonRoundTrip) {
  const auto c = load_cert("square-certificate.json");
  EXPECT_EQ(SpbCertificate::from_json(c.to_json()).to_json(), c.to_json());
  EXPECT_THROW(SpbCertificate::from_json(nlohmann::json::parse(R"({"kind": "spb-certificate", "f": "2*(p"})")),
               ConfigError);
}

TEST(Spb, SearchFindsBoundsForSquare) {
  const auto cert = load_cert("square-certificate.json");
  const auto res = search_bounding_params_full(cert);
  EXPECT_TRUE(res.audit.pass) << res.audit.violated;
  EXPECT_LT(res.audit.max_gap + res.audit.gap_slack, 0.5);

  // independent audit on 10^4 points through the closed-form catalog
  const nlohmann::json params{{"certificate", cert.to_json()}, {"params", res.params.to_json()}};
  for (double p : grid(10000)) {
    const double f = cert.f(p);
    EXPECT_LE(closed_form("spb-L", params, p), f + 1e-13);
    EXPECT_GE(closed_form("spb-U", params, p), f - 1e-13);
  }
  EXPECT_EQ(BoundingParams::from_json(res.params.to_json()).to_json(), res.params.to_json());
}

TEST(Spb, CoupledDrawsNestAndMatchMarginals) {
  const auto cert = load_cert("square-certificate.json");
  const BoundingPair pair(cert, search_bounding_params(cert));
  SamplingContext ctx(RandomStream(31, 0), kUnlimitedBudget);
  const HiddenBias bias(0.2);
  const std::uint64_t n = 20000;
  std::uint64_t l = 0, u = 0, bad = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto d = sample_coupled(pair, bias, ctx);
    l += d.l_event;
    u += d.u_event;
    bad += d.l_event && !d.u_event;
  }
  EXPECT_EQ(bad, 0u);
  EXPECT_EQ(pair.nesting_violations(), 0u);
  EXPECT_EQ(pair.coupled_draws(), n);
  const auto cl = wilson_interval(l, n, kFourSigma), cu = wilson_interval(u, n, kFourSigma);
  EXPECT_LE(cl.low, pair.lower(0.2));
  EXPECT_GE(cl.high, pair.lower(0.2));
  EXPECT_LE(cu.low, pair.upper(0.2));
  EXPECT_GE(cu.high, pair.upper(0.2));
}

TEST(Spb, GCoinFrequency) {
  const auto cert = load_cert("square-certificate.json");
  const BoundingPair pair(cert, search_bounding_params(cert));
  SamplingContext ctx(RandomStream(32, 0), kUnlimitedBudget);
  const HiddenBias bias(0.8);
  const std::uint64_t n = 20000;
  std::uint64_t h = 0;
  for (std::uint64_t i = 0; i < n; ++i) h += g_coin(pair, bias, ctx);
  const auto ci = wilson_interval(h, n, kFourSigma);
  EXPECT_LE(ci.low, pair.g(0.8));
  EXPECT_GE(ci.high, pair.g(0.8));
}

TEST(Spb, IdentityChainFirstLevels) {
  GkChain chain(identity_cert());
  const auto& g = chain.grid();
  for (std::size_t k = 1; k < 6; ++k) {
    const auto& a = chain.level(k);
    const auto& b = chain.level(k + 1);
    EXPECT_TRUE(a.audit.pass);
    for (std::size_t i = 0; i < g.size(); i += 97) {
      EXPECT_LT(2.0 / 3.0 * a.grid_f[i], b.grid_f[i] + 1e-12);
      EXPECT_GE(b.grid_f[i], 0.0);
      EXPECT_LE(b.grid_f[i], 1.0);
    }
  }
  EXPECT_GE(chain.built(), 6u);
  const double err = std::fabs(chain.partial_sum(6, 0.37) - 0.37);
  EXPECT_LE(err, std::pow(0.75, 5));
}

TEST(Spb, ChainSampleAtZeroOfTarget) {
  GkChain chain(load_cert("square-certificate.json"));
  const auto s = estimate_trials([&](SamplingContext& ctx) { return spb_sample(chain, HiddenBias(0.5), ctx); }, 2000,
                                 RandomStream(33, 0), {.budget = kUnlimitedBudget});
  EXPECT_EQ(s.heads, 0u);
  EXPECT_EQ(chain.nesting_violations(), 0u);
}

}  // namespace
}  // namespace qbf
