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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qbf/sample_index.hpp"

namespace qbf {

struct Node;

// Immutable handle to a composition tree. Copies share structure.
class Protocol {
 public:
  Protocol() = default;
  explicit Protocol(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const { return *node_; }
  bool valid() const noexcept { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<const Node> node_;
};

enum class Source : std::uint8_t { PCoin, Quoin, HCoin, FairBit, Constant, Known };

struct Primitive {
  Source source = Source::PCoin;
  double a = 0.0;        // h-coin rotation
  bool value = false;    // constant
  double q = 0.0;        // known, dyadic form
  std::uint64_t num = 0; // known, rational form when den > 0
  std::uint64_t den = 0;
};

struct Negate {
  Protocol inner;
};

// Heads iff k runs of inner are all heads; stops at the first tails.
struct AllOf {
  std::uint64_t k = 1;
  Protocol inner;
};

struct Mix {
  WeightSequence weights;
  std::vector<Protocol> branches;
};

enum class RoundKind : std::uint8_t { BellPostselect, PairDiffer };

// BellPostselect: Bell rounds until Psi+ (heads) or Phi-; inner unused.
// PairDiffer: two runs of inner until they differ; the second one is the output.
struct Retry {
  RoundKind round = RoundKind::BellPostselect;
  Protocol inner;
};

// Parity walk driven by a step coin of bias g; heads with probability 1 - sqrt(1-g).
struct Ladder {
  Protocol step;
};

// Draw k from the weights, then heads iff k runs of inner are all heads.
struct Series {
  WeightSequence weights;
  Protocol inner;
};

enum class BernsteinMode : std::uint8_t { A, B };

// n p-coins, k heads, accept with probability (2/3)v_k (A) or 1/3 + (2/3)v_k (B).
struct Bernstein {
  std::uint32_t n = 1;
  BernsteinMode mode = BernsteinMode::A;
  std::vector<double> values;
};

struct Node {
  std::variant<Primitive, Negate, AllOf, Mix, Retry, Ladder, Series, Bernstein> v;
};

// Acceptance threshold used by the Bernstein node for value v.
double bernstein_threshold(BernsteinMode mode, double v);

namespace build {

Protocol p_coin();
Protocol quoin();
Protocol h_coin(double a);
Protocol fair_bit();
Protocol constant(bool value);
Protocol known(double q);
Protocol known_rational(std::uint64_t num, std::uint64_t den);
Protocol negate(Protocol inner);
Protocol all_of(std::uint64_t k, Protocol inner);
Protocol mix(std::vector<double> weights, std::vector<Protocol> branches);
Protocol bell_postselect();
Protocol pair_differ(Protocol inner);
Protocol ladder(Protocol step);
Protocol series(WeightSequence weights, Protocol inner);
Protocol bernstein(std::uint32_t n, BernsteinMode mode, std::vector<double> values);
Protocol bernstein(const std::function<double(double)>& f, std::uint32_t n, BernsteinMode mode);

Protocol von_neumann();
Protocol g1();
Protocol f_wedge_series();
Protocol f_wedge_ladder();
Protocol t_coin(std::uint64_t m, std::uint64_t M, double z);
Protocol f_alpha(double alpha, double a);

}  // namespace build

// Named protocols for the command line: von-neumann, g1, f-wedge-series, ...
Protocol builtin_protocol(const std::string& name);
std::vector<std::string> builtin_protocol_names();

nlohmann::json to_json(const Protocol& p);
// Throws ConfigError naming the JSON path of the first problem.
Protocol protocol_from_json(const nlohmann::json& j);

}  // namespace qbf
