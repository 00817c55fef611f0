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

#include "qbf/closed_form.hpp"

#include <cmath>
#include <variant>

#include <boost/math/special_functions/binomial.hpp>

#include "qbf/errors.hpp"
#include "qbf/spb.hpp"

namespace qbf::closed {

double f_wedge(double p) { return 2.0 * std::min(p, 1.0 - p); }

double h(double a, double p) {
  const double s = std::sin(std::asin(std::sqrt(p)) - std::asin(std::sqrt(a)));
  return s * s;
}

double g1(double p) { return 4.0 * p * (1.0 - p); }

double ladder(double g) { return 1.0 - std::sqrt(1.0 - g); }

double t(std::uint64_t m, std::uint64_t M, double z, double p) {
  const double block = 1.0 - std::pow(1.0 - h(z, p), static_cast<double>(m));
  return std::pow(block, static_cast<double>(M));
}

double power(double x, std::uint64_t k) { return std::pow(x, static_cast<double>(k)); }

double bernstein(const std::vector<double>& values, BernsteinMode mode, double p) {
  const auto n = static_cast<unsigned>(values.size() - 1);
  double acc = 0.0;
  for (unsigned k = 0; k <= n; ++k) {
    const double w = boost::math::binomial_coefficient<double>(n, k) * std::pow(p, k) * std::pow(1.0 - p, n - k);
    acc += w * bernstein_threshold(mode, values[k]);
  }
  return acc;
}

double f_alpha(double alpha, double a, double p) { return alpha * h(a, p); }

double a_poly(const std::vector<double>& extended, double p) {
  double v = p * (1.0 - p);
  for (double a : extended) {
    const double hv = h(a, p);
    v *= hv * (1.0 - hv);
  }
  return v;
}

namespace {

struct Valuer {
  double p;
  double operator()(const Primitive& prim) const {
    switch (prim.source) {
      case Source::PCoin:
      case Source::Quoin: return p;
      case Source::HCoin: return h(prim.a, p);
      case Source::FairBit: return 0.5;
      case Source::Constant: return prim.value ? 1.0 : 0.0;
      case Source::Known: return prim.q;
    }
    return 0.0;
  }
  double operator()(const Negate& n) const { return 1.0 - protocol_value(n.inner, p); }
  double operator()(const AllOf& a) const { return power(protocol_value(a.inner, p), a.k); }
  double operator()(const Mix& m) const {
    double s = 0.0;
    for (std::size_t i = 0; i < m.branches.size(); ++i) s += m.weights.weight(i + 1) * protocol_value(m.branches[i], p);
    return s;
  }
  double operator()(const Retry& r) const {
    if (r.round == RoundKind::BellPostselect) return g1(p);
    const double x = protocol_value(r.inner, p);
    if (x <= 0.0 || x >= 1.0) throw UnsupportedStructure("pair-differ never decides at this p");
    return 0.5;
  }
  double operator()(const Ladder& l) const { return ladder(protocol_value(l.step, p)); }
  double operator()(const Series& s) const {
    const double x = protocol_value(s.inner, p);
    switch (s.weights.family()) {
      case WeightSequence::Family::Qk: return ladder(x);  // sum_k q_k x^k = 1 - sqrt(1-x)
      case WeightSequence::Family::Geometric: {
        const double r = s.weights.ratio();
        return (1.0 - r) * x / (1.0 - r * x);
      }
      case WeightSequence::Family::Finite: {
        double acc = 0.0;
        const auto& w = s.weights.finite_weights();
        for (std::size_t k = 1; k <= w.size(); ++k) acc += w[k - 1] * power(x, k);
        return acc;
      }
    }
    return 0.0;
  }
  double operator()(const Bernstein& b) const { return bernstein(b.values, b.mode, p); }
};

}  // namespace

double protocol_value(const Protocol& protocol, double p) { return std::visit(Valuer{p}, protocol.node().v); }

}  // namespace qbf::closed

namespace qbf {

namespace {

double num(const nlohmann::json& params, const char* key) {
  if (!params.is_object() || !params.contains(key) || !params.at(key).is_number())
    throw ConfigError(std::string("closed form needs numeric parameter '") + key + "'");
  return params.at(key).get<double>();
}

std::uint64_t count(const nlohmann::json& params, const char* key) {
  const double v = num(params, key);
  if (v < 1.0 || v != std::floor(v)) throw ConfigError(std::string("closed form parameter '") + key + "' must be a positive integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

double closed_form(const std::string& name, const nlohmann::json& params, double p) {
  if (name == "f-wedge") return closed::f_wedge(p);
  if (name == "h") return closed::h(num(params, "a"), p);
  if (name == "g1") return closed::g1(p);
  if (name == "t") return closed::t(count(params, "m"), count(params, "M"), num(params, "z"), p);
  if (name == "power") return closed::power(p, count(params, "k"));
  if (name == "von-neumann") return 0.5;
  if (name == "f-alpha") return closed::f_alpha(num(params, "alpha"), num(params, "a"), p);
  if (name == "bernstein") {
    if (!params.contains("values") || !params.contains("mode")) throw ConfigError("bernstein closed form needs values and mode");
    const auto values = params.at("values").get<std::vector<double>>();
    if (values.size() < 2) throw ConfigError("bernstein closed form needs n+1 >= 2 values");
    return closed::bernstein(values, params.at("mode").get<std::string>() == "A" ? BernsteinMode::A : BernsteinMode::B, p);
  }
  if (name == "spb-L" || name == "spb-U" || name == "spb-g") {
    if (!params.is_object() || !params.contains("certificate") || !params.contains("params"))
      throw ConfigError("spb closed forms need 'certificate' and 'params'");
    const auto cert = SpbCertificate::from_json(params.at("certificate"));
    const auto bp = BoundingParams::from_json(params.at("params"));
    if (name == "spb-L") return eval_L(bp, cert, p);
    if (name == "spb-U") return eval_U(bp, cert, p);
    return eval_g(bp, cert, p);
  }
  if (name == "a") {
    const auto ext = params.is_object() && params.contains("extended") ? params.at("extended").get<std::vector<double>>()
                                                                         : std::vector<double>{};
    return closed::a_poly(ext, p);
  }
  throw ConfigError("unknown closed-form target: " + name);
}

std::vector<std::string> closed_form_names() {
  return {"a", "bernstein", "f-alpha", "f-wedge", "g1", "h", "power", "spb-L", "spb-U", "spb-g", "t", "von-neumann"};
}

}  // namespace qbf
