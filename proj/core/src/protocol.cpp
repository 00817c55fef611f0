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

#include "qbf/protocol.hpp"

#include <cmath>
#include <string>

#include "qbf/errors.hpp"

namespace qbf {

namespace {

Protocol wrap(decltype(Node::v) v) {
  auto n = std::make_shared<Node>();
  n->v = std::move(v);
  return Protocol(std::move(n));
}

void need(const Protocol& p, const char* what) {
  if (!p.valid()) throw ConfigError(std::string(what) + ": missing inner protocol");
}

void check_unit(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw ConfigError(std::string(what) + " must lie in [0,1]");
}

}  // namespace

double bernstein_threshold(BernsteinMode mode, double v) {
  const double a = (2.0 / 3.0) * v;
  return mode == BernsteinMode::A ? a : 1.0 / 3.0 + a;
}

namespace build {

Protocol p_coin() { return wrap(Primitive{Source::PCoin}); }
Protocol quoin() { return wrap(Primitive{Source::Quoin}); }
Protocol fair_bit() { return wrap(Primitive{Source::FairBit}); }

Protocol h_coin(double a) {
  check_unit(a, "h-coin rotation");
  Primitive p{Source::HCoin};
  p.a = a;
  return wrap(p);
}

Protocol constant(bool value) {
  Primitive p{Source::Constant};
  p.value = value;
  return wrap(p);
}

Protocol known(double q) {
  check_unit(q, "known probability");
  Primitive p{Source::Known};
  p.q = q;
  return wrap(p);
}

Protocol known_rational(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || num > den) throw ConfigError("known rational must satisfy 0 <= num <= den, den > 0");
  Primitive p{Source::Known};
  p.num = num;
  p.den = den;
  p.q = static_cast<double>(num) / static_cast<double>(den);
  return wrap(p);
}

Protocol negate(Protocol inner) {
  need(inner, "negate");
  return wrap(Negate{std::move(inner)});
}

Protocol all_of(std::uint64_t k, Protocol inner) {
  if (k == 0) throw ConfigError("all-of-k needs k >= 1");
  need(inner, "all-of-k");
  return wrap(AllOf{k, std::move(inner)});
}

Protocol mix(std::vector<double> weights, std::vector<Protocol> branches) {
  if (weights.size() != branches.size()) throw ConfigError("mix needs one branch per weight");
  for (const auto& b : branches) need(b, "mix");
  return wrap(Mix{WeightSequence::finite(std::move(weights)), std::move(branches)});
}

Protocol bell_postselect() { return wrap(Retry{RoundKind::BellPostselect, Protocol()}); }

Protocol pair_differ(Protocol inner) {
  need(inner, "pair-differ");
  return wrap(Retry{RoundKind::PairDiffer, std::move(inner)});
}

Protocol ladder(Protocol step) {
  need(step, "ladder");
  return wrap(Ladder{std::move(step)});
}

Protocol series(WeightSequence weights, Protocol inner) {
  need(inner, "series");
  return wrap(Series{std::move(weights), std::move(inner)});
}

Protocol bernstein(std::uint32_t n, BernsteinMode mode, std::vector<double> values) {
  if (n == 0) throw ConfigError("bernstein needs n >= 1");
  if (values.size() != static_cast<std::size_t>(n) + 1) throw ConfigError("bernstein needs n+1 values");
  for (double v : values) check_unit(v, "bernstein value");
  return wrap(Bernstein{n, mode, std::move(values)});
}

Protocol bernstein(const std::function<double(double)>& f, std::uint32_t n, BernsteinMode mode) {
  if (n == 0) throw ConfigError("bernstein needs n >= 1");
  std::vector<double> v(n + 1);
  for (std::uint32_t k = 0; k <= n; ++k) v[k] = f(static_cast<double>(k) / n);
  return bernstein(n, mode, std::move(v));
}

Protocol von_neumann() { return pair_differ(p_coin()); }
Protocol g1() { return bell_postselect(); }
Protocol f_wedge_series() { return series(WeightSequence::qk(), g1()); }
Protocol f_wedge_ladder() { return ladder(g1()); }

Protocol t_coin(std::uint64_t m, std::uint64_t M, double z) {
  return all_of(M, negate(all_of(m, negate(h_coin(z)))));
}

Protocol f_alpha(double alpha, double a) {
  check_unit(alpha, "alpha");
  return mix({alpha, 1.0 - alpha}, {h_coin(a), constant(false)});
}

}  // namespace build

Protocol builtin_protocol(const std::string& name) {
  if (name == "p-coin") return build::p_coin();
  if (name == "quoin") return build::quoin();
  if (name == "von-neumann") return build::von_neumann();
  if (name == "p-squared") return build::all_of(2, build::p_coin());
  if (name == "g1") return build::g1();
  if (name == "f-wedge-series") return build::f_wedge_series();
  if (name == "f-wedge-ladder") return build::f_wedge_ladder();
  if (name == "f-alpha") return build::f_alpha(0.99, 0.25);
  throw ConfigError("unknown protocol name: " + name);
}

std::vector<std::string> builtin_protocol_names() {
  return {"f-alpha", "f-wedge-ladder", "f-wedge-series", "g1", "p-coin", "p-squared", "quoin", "von-neumann"};
}

// ---- JSON ----

namespace {

using nlohmann::json;

json weights_json(const WeightSequence& w) {
  switch (w.family()) {
    case WeightSequence::Family::Finite: return w.finite_weights();
    case WeightSequence::Family::Qk: return "qk";
    case WeightSequence::Family::Geometric: return json{{"geometric", w.ratio()}};
  }
  return nullptr;
}

const char* source_name(Source s) {
  switch (s) {
    case Source::PCoin: return "p-coin";
    case Source::Quoin: return "quoin";
    case Source::HCoin: return "h-coin";
    case Source::FairBit: return "fair-bit";
    case Source::Constant: return "constant";
    case Source::Known: return "known";
  }
  return "?";
}

struct Reader {
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("protocol JSON at " + (path.empty() ? std::string("/") : path) + ": " + msg);
  }

  static const json& field(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) fail(path, std::string("missing field '") + key + "'");
    return j.at(key);
  }

  static double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  static std::uint64_t count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
      fail(path, "expected a non-negative integer");
    return j.get<std::uint64_t>();
  }

  static std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "/" + std::to_string(i)));
    return out;
  }

  static WeightSequence weights(const json& j, const std::string& path) {
    if (j.is_string()) {
      if (j.get<std::string>() == "qk") return WeightSequence::qk();
      fail(path, "unknown weight family '" + j.get<std::string>() + "'");
    }
    if (j.is_object() && j.contains("geometric")) return WeightSequence::geometric(number(j.at("geometric"), path + "/geometric"));
    return WeightSequence::finite(numbers(j, path));
  }

  static Protocol read(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const json& kind_j = field(j, path, "kind");
    if (!kind_j.is_string()) fail(path + "/kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();
    try {
      if (kind == "primitive") return primitive(j, path);
      if (kind == "negate") return build::negate(read(field(j, path, "inner"), path + "/inner"));
      if (kind == "all-of-k")
        return build::all_of(count(field(j, path, "k"), path + "/k"), read(field(j, path, "inner"), path + "/inner"));
      if (kind == "mix") {
        const auto w = numbers(field(j, path, "weights"), path + "/weights");
        const json& br = field(j, path, "branches");
        if (!br.is_array()) fail(path + "/branches", "expected an array");
        std::vector<Protocol> branches;
        for (std::size_t i = 0; i < br.size(); ++i) branches.push_back(read(br[i], path + "/branches/" + std::to_string(i)));
        return build::mix(w, std::move(branches));
      }
      if (kind == "retry") {
        const json& r = field(j, path, "round");
        const std::string round = r.is_string() ? r.get<std::string>() : "";
        if (round == "bell-postselect") return build::bell_postselect();
        if (round == "pair-differ") return build::pair_differ(read(field(j, path, "inner"), path + "/inner"));
        fail(path + "/round", "expected 'bell-postselect' or 'pair-differ'");
      }
      if (kind == "ladder") return build::ladder(read(field(j, path, "step"), path + "/step"));
      if (kind == "series")
        return build::series(weights(field(j, path, "weights"), path + "/weights"),
                             read(field(j, path, "inner"), path + "/inner"));
      if (kind == "bernstein") {
        const auto n = count(field(j, path, "n"), path + "/n");
        const json& m = field(j, path, "mode");
        const std::string mode = m.is_string() ? m.get<std::string>() : "";
        if (mode != "A" && mode != "B") fail(path + "/mode", "expected 'A' or 'B'");
        if (n == 0 || n > 0xFFFFFFFFull) fail(path + "/n", "out of range");
        return build::bernstein(static_cast<std::uint32_t>(n), mode == "A" ? BernsteinMode::A : BernsteinMode::B,
                                numbers(field(j, path, "values"), path + "/values"));
      }
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind("protocol JSON at ", 0) == 0) throw;
      fail(path, msg);
    }
    fail(path + "/kind", "unknown node kind '" + kind + "'");
  }

  static Protocol primitive(const json& j, const std::string& path) {
    const json& s = field(j, path, "source");
    const std::string src = s.is_string() ? s.get<std::string>() : "";
    if (src == "p-coin") return build::p_coin();
    if (src == "quoin") return build::quoin();
    if (src == "fair-bit") return build::fair_bit();
    if (src == "h-coin") return build::h_coin(number(field(j, path, "a"), path + "/a"));
    if (src == "constant") {
      const json& v = field(j, path, "value");
      if (!v.is_boolean()) fail(path + "/value", "expected a boolean");
      return build::constant(v.get<bool>());
    }
    if (src == "known") {
      if (j.contains("den"))
        return build::known_rational(count(field(j, path, "num"), path + "/num"), count(j.at("den"), path + "/den"));
      return build::known(number(field(j, path, "q"), path + "/q"));
    }
    fail(path + "/source", "unknown source '" + src + "'");
  }
};

struct Writer {
  json operator()(const Primitive& p) const {
    json j{{"kind", "primitive"}, {"source", source_name(p.source)}};
    if (p.source == Source::HCoin) j["a"] = p.a;
    if (p.source == Source::Constant) j["value"] = p.value;
    if (p.source == Source::Known) {
      if (p.den > 0) {
        j["num"] = p.num;
        j["den"] = p.den;
      } else {
        j["q"] = p.q;
      }
    }
    return j;
  }
  json operator()(const Negate& n) const { return {{"kind", "negate"}, {"inner", to_json(n.inner)}}; }
  json operator()(const AllOf& a) const { return {{"kind", "all-of-k"}, {"k", a.k}, {"inner", to_json(a.inner)}}; }
  json operator()(const Mix& m) const {
    json br = json::array();
    for (const auto& b : m.branches) br.push_back(to_json(b));
    return {{"kind", "mix"}, {"weights", m.weights.finite_weights()}, {"branches", br}};
  }
  json operator()(const Retry& r) const {
    if (r.round == RoundKind::BellPostselect) return {{"kind", "retry"}, {"round", "bell-postselect"}};
    return {{"kind", "retry"}, {"round", "pair-differ"}, {"inner", to_json(r.inner)}};
  }
  json operator()(const Ladder& l) const { return {{"kind", "ladder"}, {"step", to_json(l.step)}}; }
  json operator()(const Series& s) const {
    return {{"kind", "series"}, {"weights", weights_json(s.weights)}, {"inner", to_json(s.inner)}};
  }
  json operator()(const Bernstein& b) const {
    return {{"kind", "bernstein"}, {"n", b.n}, {"mode", b.mode == BernsteinMode::A ? "A" : "B"}, {"values", b.values}};
  }
};

}  // namespace

nlohmann::json to_json(const Protocol& p) {
  if (!p.valid()) return nullptr;
  return std::visit(Writer{}, p.node().v);
}

Protocol protocol_from_json(const nlohmann::json& j) { return Reader::read(j, ""); }

}  // namespace qbf
