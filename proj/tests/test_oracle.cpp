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

#include <random>
#include <vector>

#include "frozen.hpp"
#include "qbf/closed_form.hpp"
#include "qbf/errors.hpp"
#include "qbf/oracle.hpp"
#include "qbf/protocol.hpp"

namespace qbf {
namespace {

using testing::frozen;

TEST(Oracle, FrozenValues) {
  const auto& t = frozen().at("t_coin_2_1_0");
  for (int i = 0; i < 2; ++i) {
    const double p = t.at("p")[i].get<double>();
    EXPECT_NEAR(exact_prob_enum(build::t_coin(2, 1, 0.0), p), t.at("value")[i].get<double>(), 1e-15);
    EXPECT_NEAR(closed::t(2, 1, 0.0, p), t.at("value")[i].get<double>(), 1e-15);
  }
  EXPECT_NEAR(exact_prob_enum(build::g1(), 0.3), frozen().at("g1_0.3").get<double>(), 1e-15);
  EXPECT_NEAR(exact_prob_enum(build::h_coin(0.25), 0.75), frozen().at("h_quarter_at_three_quarters").get<double>(),
              1e-15);
  EXPECT_NEAR(exact_prob_enum(build::f_alpha(0.99, 0.25), 0.75), frozen().at("f_alpha_0.99_at_0.75").get<double>(),
              1e-15);
  EXPECT_NEAR(closed::a_poly({0.5}, 0.3), frozen().at("a_half_at_0.3").get<double>(), 1e-17);
}

TEST(Oracle, WedgeSeriesMatchesClosedForm) {
  const auto& w = frozen().at("f_wedge");
  for (std::size_t i = 0; i < w.at("p").size(); ++i) {
    const double p = w.at("p")[i].get<double>();
    EXPECT_NEAR(closed::f_wedge(p), w.at("value")[i].get<double>(), 1e-15);
  }
  const auto& l = frozen().at("ladder_closed_form");
  for (std::size_t i = 0; i < l.at("p").size(); ++i)
    EXPECT_NEAR(closed::ladder(closed::g1(l.at("p")[i].get<double>())), l.at("value")[i].get<double>(), 1e-14);
}

TEST(Oracle, AgreesWithClosedFormAtRandomPoints) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Protocol> family = {build::h_coin(0.0),       build::h_coin(0.25),          build::h_coin(0.5),
                                  build::g1(),              build::all_of(4, build::p_coin()),
                                  build::t_coin(3, 2, 0.5), build::von_neumann(),
                                  build::bernstein([](double x) { return x; }, 7, BernsteinMode::B)};
  for (int i = 0; i < 10; ++i) {
    const double p = u(rng);
    for (const auto& proto : family)
      EXPECT_NEAR(exact_prob_enum(proto, p), closed::protocol_value(proto, p), 1e-12) << to_json(proto).dump();
  }
}

TEST(Oracle, ConstantBernsteinBounds) {
  const auto& ref = frozen().at("const_half_bounds");
  const std::vector<double> half(5, 0.5);
  EXPECT_NEAR(exact_prob_enum(build::bernstein(4, BernsteinMode::A, half), 0.3), ref.at("L").get<double>(), 1e-15);
  EXPECT_NEAR(exact_prob_enum(build::bernstein(4, BernsteinMode::B, half), 0.3), ref.at("U").get<double>(), 1e-15);
}

TEST(Oracle, LadderIsUnsupported) {
  EXPECT_THROW(exact_prob_enum(build::f_wedge_ladder(), 0.3), UnsupportedStructure);
}

TEST(ClosedForm, CatalogLookup) {
  EXPECT_NEAR(closed_form("g1", {}, 0.3), frozen().at("g1_0.3").get<double>(), 1e-15);
  EXPECT_NEAR(closed_form("h", {{"a", 0.25}}, 0.75), frozen().at("h_quarter_at_three_quarters").get<double>(), 1e-15);
  EXPECT_THROW(closed_form("nope", {}, 0.3), ConfigError);
  EXPECT_THROW(closed_form("h", {}, 0.3), ConfigError);
}

}  // namespace
}  // namespace qbf
