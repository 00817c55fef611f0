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

#include "qbf/spb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qbf/errors.hpp"
#include "qbf/expression.hpp"
#include "qbf/known_probability.hpp"
#include "qbf/sample_index.hpp"

namespace qbf {

namespace {

constexpr double kTwoThirds = 2.0 / 3.0;
constexpr double kThird = 1.0 / 3.0;

std::string num(double x) {
  std::ostringstream o;
  o.precision(6);
  o << x;
  return o.str();
}

bool at_boundary(double point) { return point == 0.0 || point == 1.0; }

// M matching the approach order: h_z is quadratic at interior z, linear at 0 and 1.
std::uint32_t order_M(const PointBound& b) {
  return at_boundary(b.point) ? static_cast<std::uint32_t>(2 * b.k - 1) : static_cast<std::uint32_t>(b.k);
}

std::vector<double> uniform_grid(std::size_t points) {
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = 1.0;
  return g;
}

// Both Bernstein sums at once; the pmf walk outward from the mode is shared.
void bernstein_pair(const std::vector<double>& v1, const std::vector<double>& v2, double p, double& s1, double& s2) {
  const std::size_t n = v1.size() - 1;
  if (n == 0 || p <= 0.0) {
    s1 = v1.front();
    s2 = v2.front();
    return;
  }
  if (p >= 1.0) {
    s1 = v1.back();
    s2 = v2.back();
    return;
  }
  const double dn = static_cast<double>(n);
  const std::size_t mode = std::min(n, static_cast<std::size_t>(std::floor((dn + 1.0) * p)));
  const double dm = static_cast<double>(mode);
  const double w0 = std::exp(std::lgamma(dn + 1.0) - std::lgamma(dm + 1.0) - std::lgamma(dn - dm + 1.0) +
                             dm * std::log(p) + (dn - dm) * std::log1p(-p));
  const double cut = w0 * 1e-18;
  const double r = p / (1.0 - p);
  double a = w0 * v1[mode], b = w0 * v2[mode];
  double w = w0;
  for (std::size_t j = mode; j < n; ++j) {
    w *= static_cast<double>(n - j) / static_cast<double>(j + 1) * r;
    if (w < cut) break;
    a += w * v1[j + 1];
    b += w * v2[j + 1];
  }
  w = w0;
  for (std::size_t j = mode; j > 0; --j) {
    w *= static_cast<double>(j) / static_cast<double>(n - j + 1) / r;
    if (w < cut) break;
    a += w * v1[j - 1];
    b += w * v2[j - 1];
  }
  s1 = a;
  s2 = b;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void check_point_list(const std::vector<PointBound>& pts, const char* what) {
  for (const auto& b : pts) {
    if (!(b.point >= 0.0 && b.point <= 1.0)) throw ConfigError(std::string(what) + " point outside [0,1]");
    if (!(b.c > 0.0)) throw ConfigError(std::string(what) + " constant c must be positive");
    if (b.k < 1) throw ConfigError(std::string(what) + " order k must be >= 1");
    if (!(b.delta > 0.0)) throw ConfigError(std::string(what) + " delta must be positive");
  }
}

std::vector<PointBound> points_from_json(const nlohmann::json& j, const char* key) {
  std::vector<PointBound> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw ConfigError(std::string("certificate field '") + key + "' must be an array");
  for (const auto& e : j.at(key)) {
    PointBound b;
    b.point = e.at("point").get<double>();
    b.c = e.value("c", 1.0);
    b.k = e.value("k", 1);
    b.delta = e.value("delta", 0.25);
    out.push_back(b);
  }
  return out;
}

nlohmann::json points_to_json(const std::vector<PointBound>& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& b : pts) a.push_back({{"point", b.point}, {"c", b.c}, {"k", b.k}, {"delta", b.delta}});
  return a;
}

nlohmann::json heavisides_to_json(const std::vector<Heaviside>& hs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& h : hs) a.push_back({{"center", h.center}, {"m", h.m}, {"M", h.M}});
  return a;
}

std::vector<Heaviside> heavisides_from_json(const nlohmann::json& j, const char* key) {
  std::vector<Heaviside> out;
  if (!j.contains(key)) return out;
  for (const auto& e : j.at(key)) {
    Heaviside h;
    h.center = e.at("center").get<double>();
    h.m = e.at("m").get<std::uint64_t>();
    h.M = e.at("M").get<std::uint32_t>();
    if (h.m == 0 || h.M == 0) throw ConfigError("heaviside m and M must be positive");
    if (!(h.center >= 0.0 && h.center <= 1.0)) throw ConfigError("heaviside center outside [0,1]");
    out.push_back(h);
  }
  return out;
}

bool run_heaviside(const Heaviside& t, const RotationParam& rot, const HiddenBias& bias, SamplingContext& ctx) {
  for (std::uint32_t g = 0; g < t.M; ++g) {
    bool hit = false;
    for (std::uint64_t i = 0; i < t.m && !hit; ++i) hit = h_coin(rot, bias, ctx) == 1;
    if (!hit) return false;
  }
  return true;
}

}  // namespace

// ---- certificate and params ----

SpbCertificate SpbCertificate::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ConfigError("certificate must be a JSON object");
    if (j.contains("kind") && j.at("kind") != "spb-certificate")
      throw ConfigError("certificate kind must be 'spb-certificate'");
    SpbCertificate c;
    c.expression = j.at("f").get<std::string>();
    auto e = std::make_shared<Expression>(Expression::parse(c.expression));
    c.f = [e](double p) { return (*e)(p); };
    c.lipschitz = j.at("lipschitz").get<double>();
    if (!(c.lipschitz > 0.0)) throw ConfigError("lipschitz must be positive");
    c.zeros = points_from_json(j, "zeros");
    c.ones = points_from_json(j, "ones");
    check_point_list(c.zeros, "zero");
    check_point_list(c.ones, "one");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("certificate JSON: ") + e.what());
  }
}

nlohmann::json SpbCertificate::to_json() const {
  return {{"kind", "spb-certificate"},
          {"f", expression},
          {"lipschitz", lipschitz},
          {"zeros", points_to_json(zeros)},
          {"ones", points_to_json(ones)}};
}

BoundingParams BoundingParams::from_json(const nlohmann::json& j) {
  try {
    BoundingParams b;
    b.n = j.at("n").get<std::uint64_t>();
    if (b.n == 0) throw ConfigError("Bernstein degree n must be >= 1");
    b.zero_heavisides = heavisides_from_json(j, "zero_heavisides");
    b.one_heavisides = heavisides_from_json(j, "one_heavisides");
    b.grid = j.value("grid", 1e-4);
    b.corrected_nodes = j.value("corrected_nodes", false);
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bounding params JSON: ") + e.what());
  }
}

nlohmann::json BoundingParams::to_json() const {
  return {{"kind", "bounding-params"},
          {"n", n},
          {"zero_heavisides", heavisides_to_json(zero_heavisides)},
          {"one_heavisides", heavisides_to_json(one_heavisides)},
          {"grid", grid},
          {"corrected_nodes", corrected_nodes}};
}

double heaviside_value(const Heaviside& t, double p) {
  const double h = h_bias(t.center, p);
  if (h >= 1.0) return 1.0;
  const double block = -std::expm1(static_cast<double>(t.m) * std::log1p(-h));
  return std::pow(std::max(0.0, block), static_cast<double>(t.M));
}

double bernstein_sum(const std::vector<double>& v, double p) {
  if (v.empty()) throw ConfigError("bernstein_sum needs at least one value");
  double s = 0.0, unused = 0.0;
  bernstein_pair(v, v, p, s, unused);
  return s;
}

// ---- bounding pair ----

namespace {

// f(j/n), optionally minus (x(1-x)/2n) f'' from second differences.
std::vector<double> node_values(const std::function<double(double)>& f, std::uint64_t n, bool corrected) {
  std::vector<double> v(n + 1);
  for (std::uint64_t j = 0; j <= n; ++j) v[j] = f(static_cast<double>(j) / static_cast<double>(n));
  if (!corrected || n < 2) return v;
  std::vector<double> out(v);
  const double dn = static_cast<double>(n);
  for (std::uint64_t j = 1; j < n; ++j) {
    const double x = static_cast<double>(j) / dn;
    out[j] = v[j] - 0.5 * dn * x * (1.0 - x) * (v[j + 1] - 2.0 * v[j] + v[j - 1]);
  }
  return out;
}

}  // namespace

BoundingPair::BoundingPair(const SpbCertificate& cert, BoundingParams params) : params_(std::move(params)) {
  if (params_.n == 0) throw ConfigError("Bernstein degree n must be >= 1");
  init(node_values(cert.f, params_.n, params_.corrected_nodes));
}

BoundingPair::BoundingPair(std::vector<double> node_values, BoundingParams params) : params_(std::move(params)) {
  if (node_values.size() != params_.n + 1) throw ConfigError("node count must be n + 1");
  init(node_values);
}

void BoundingPair::init(const std::vector<double>& nodes) {
  a_.resize(nodes.size());
  b_.resize(nodes.size());
  one_b_.resize(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double v = clamp01(nodes[j]);
    a_[j] = kTwoThirds * v;
    b_[j] = kThird + a_[j];  // >= a_[j] in floating point too
    one_b_[j] = 1.0 - b_[j];
  }
  for (const auto& t : params_.zero_heavisides) zero_rot_.emplace_back(t.center);
  for (const auto& t : params_.one_heavisides) one_rot_.emplace_back(t.center);
}

BoundingPair::Parts BoundingPair::parts(double p) const {
  Parts r;
  bernstein_pair(a_, one_b_, p, r.a, r.one_b);
  for (const auto& t : params_.zero_heavisides) r.tz *= heaviside_value(t, p);
  for (const auto& t : params_.one_heavisides) r.tw *= heaviside_value(t, p);
  return r;
}

double BoundingPair::lower(double p) const {
  const Parts r = parts(p);
  return r.a * r.tz;
}

double BoundingPair::upper(double p) const {
  const Parts r = parts(p);
  return 1.0 - r.tw * r.one_b;
}

double BoundingPair::g(double p) const {
  const Parts r = parts(p);
  const double l = r.a * r.tz;
  const double den = r.tw * r.one_b + l;
  return den > 0.0 ? l / den : 0.0;
}

double eval_L(const BoundingParams& params, const SpbCertificate& cert, double p) {
  return BoundingPair(cert, params).lower(p);
}

double eval_U(const BoundingParams& params, const SpbCertificate& cert, double p) {
  return BoundingPair(cert, params).upper(p);
}

double eval_g(const BoundingParams& params, const SpbCertificate& cert, double p) {
  return BoundingPair(cert, params).g(p);
}

// ---- verification ----

nlohmann::json SpbReport::to_json() const {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : checks)
    a.push_back({{"condition", c.condition}, {"pass", c.pass}, {"worst_p", c.worst_p}, {"worst_excess", c.worst_excess}});
  return {{"pass", pass}, {"checks", a}};
}

std::string SpbReport::diagnostic() const {
  for (const auto& c : checks)
    if (!c.pass) return c.condition + " violated at p=" + num(c.worst_p) + " (excess " + num(c.worst_excess) + ")";
  return {};
}

SpbReport verify_spb(const SpbCertificate& cert, std::size_t grid_points) {
  const std::vector<double> grid = uniform_grid(grid_points);
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = cert.f(grid[i]);
  return verify_spb(cert, grid, f);
}

SpbReport verify_spb(const SpbCertificate& cert, const std::vector<double>& grid, const std::vector<double>& f) {
  SpbReport rep;
  auto add = [&](std::string name, double worst_p, double excess, bool pass) {
    rep.checks.push_back({std::move(name), pass, worst_p, excess});
    rep.pass = rep.pass && pass;
  };
  constexpr double kZeroTol = 1e-12;
  const double ninf = -std::numeric_limits<double>::infinity();

  // declared structure: disjoint points, windows free of other points
  {
    bool ok = true;
    double at = 0.0;
    std::vector<std::pair<double, double>> all;  // (point, delta)
    for (const auto& b : cert.zeros) all.emplace_back(b.point, b.delta);
    for (const auto& b : cert.ones) all.emplace_back(b.point, b.delta);
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = 0; j < all.size(); ++j)
        if (i != j && std::fabs(all[i].first - all[j].first) <= all[i].second) {
          ok = false;
          at = all[i].first;
        }
    add("condition-2 declared points isolated", at, ok ? 0.0 : 1.0, ok);
  }

  double worst = ninf, wp = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(f[i])) finite = false;
    const double e = std::max(-f[i], f[i] - 1.0);
    if (!(e <= worst)) {
      worst = e;
      wp = grid[i];
    }
  }
  add("range 0<=f<=1", wp, finite ? worst : std::numeric_limits<double>::infinity(), finite && worst <= kZeroTol);

  worst = ninf;
  wp = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double e = std::fabs(f[i + 1] - f[i]) - cert.lipschitz * (grid[i + 1] - grid[i]) * (1.0 + 1e-9);
    if (e > worst) {
      worst = e;
      wp = grid[i];
    }
  }
  add("condition-1 continuity", wp, worst, worst <= kZeroTol);

  // declared zeros are zeros, declared ones are ones
  worst = ninf;
  wp = 0.0;
  for (const auto& b : cert.zeros) {
    const double e = std::fabs(cert.f(b.point)) - kZeroTol;
    if (e > worst) {
      worst = e;
      wp = b.point;
    }
  }
  for (const auto& b : cert.ones) {
    const double e = std::fabs(1.0 - cert.f(b.point)) - kZeroTol;
    if (e > worst) {
      worst = e;
      wp = b.point;
    }
  }
  add("condition-2 declared zeros and ones", wp, worst == ninf ? 0.0 : worst, worst <= 0.0);

  worst = ninf;
  wp = 0.0;
  for (const auto& b : cert.zeros)
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = grid[i] - b.point;
      if (std::fabs(d) > b.delta) continue;
      const double e = b.c * std::pow(d, 2 * b.k) - f[i];
      if (e > worst) {
        worst = e;
        wp = grid[i];
      }
    }
  add("condition-3 polynomial bound at zeros", wp, worst == ninf ? 0.0 : worst, worst <= kZeroTol);

  worst = ninf;
  wp = 0.0;
  for (const auto& b : cert.ones)
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = grid[i] - b.point;
      if (std::fabs(d) > b.delta) continue;
      const double e = f[i] - (1.0 - b.c * std::pow(d, 2 * b.k));
      if (e > worst) {
        worst = e;
        wp = grid[i];
      }
    }
  add("condition-4 polynomial bound at ones", wp, worst == ninf ? 0.0 : worst, worst <= kZeroTol);
  // f > 0 off Z and f < 1 off W; after the polynomial bounds so an
  // underflowing exponential approach is reported as condition-3
  double min_f = 1.0, min_at = 0.0, max_f = 0.0, max_at = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = grid[i];
    const bool is_zero = std::any_of(cert.zeros.begin(), cert.zeros.end(), [&](const PointBound& b) { return b.point == p; });
    const bool is_one = std::any_of(cert.ones.begin(), cert.ones.end(), [&](const PointBound& b) { return b.point == p; });
    if (!is_zero && f[i] < min_f) {
      min_f = f[i];
      min_at = p;
    }
    if (!is_one && f[i] > max_f) {
      max_f = f[i];
      max_at = p;
    }
  }
  add("condition-2 f>0 off Z", min_at, -min_f, min_f > 0.0);
  add("condition-2 f<1 off W", max_at, max_f - 1.0, max_f < 1.0);

  return rep;
}

nlohmann::json BoundAudit::to_json() const {
  return {{"pass", pass},
          {"max_gap", max_gap},
          {"gap_slack", gap_slack},
          {"worst_gap_p", worst_gap_p},
          {"lower_excess", lower_excess},
          {"lower_excess_p", lower_excess_p},
          {"upper_deficit", upper_deficit},
          {"upper_deficit_p", upper_deficit_p},
          {"violated", violated}};
}

namespace {

BoundAudit audit_values(const std::vector<double>& grid, const std::vector<double>& f, const std::vector<double>& L,
                        const std::vector<double>& U, double tol) {
  BoundAudit a;
  a.lower_excess = -std::numeric_limits<double>::infinity();
  a.upper_deficit = -std::numeric_limits<double>::infinity();
  double max_step = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gap = U[i] - L[i];
    if (gap > a.max_gap || i == 0) {
      a.max_gap = gap;
      a.worst_gap_p = grid[i];
    }
    if (L[i] - f[i] > a.lower_excess) {
      a.lower_excess = L[i] - f[i];
      a.lower_excess_p = grid[i];
    }
    if (f[i] - U[i] > a.upper_deficit) {
      a.upper_deficit = f[i] - U[i];
      a.upper_deficit_p = grid[i];
    }
    if (i > 0) max_step = std::max(max_step, std::fabs(gap - (U[i - 1] - L[i - 1])));
  }
  // allowance for the gap between grid points: the largest observed step
  a.gap_slack = max_step;
  if (!(a.lower_excess <= tol))
    a.violated = "L <= f violated at p=" + num(a.lower_excess_p) + " by " + num(a.lower_excess);
  else if (!(a.upper_deficit <= tol))
    a.violated = "f <= U violated at p=" + num(a.upper_deficit_p) + " by " + num(a.upper_deficit);
  else if (!(a.max_gap < 0.5 - a.gap_slack))
    a.violated = "max(U-L) < 1/2 violated at p=" + num(a.worst_gap_p) + ": gap " + num(a.max_gap) + " + slack " +
                 num(a.gap_slack);
  a.pass = a.violated.empty();
  return a;
}

struct SearchPoint {
  PointBound bound;
  bool is_zero = true;
  double lo = 0.0, hi = 1.0;  // cell of grid points this factor is judged on
};

using NodeFn = std::function<std::vector<double>(std::uint64_t)>;

// Node values f(j/n), optionally with the second-order bias correction
// v_j = f_j - (x_j (1 - x_j) / 2n) f''(x_j), which makes B_n v = f + O(1/n^2).
NodeFn exact_nodes(const std::function<double(double)>& f, bool corrected) {
  return [f, corrected](std::uint64_t n) { return node_values(f, n, corrected); };
}

// Nodes read off values on a uniform grid by linear interpolation, the
// correction taken from grid second differences.
NodeFn grid_nodes(const std::vector<double>* gf, bool corrected) {
  return [gf, corrected](std::uint64_t n) {
    const std::size_t G = gf->size();
    const double h = 1.0 / static_cast<double>(G - 1);
    std::vector<double> vg(*gf);
    if (corrected)
      for (std::size_t i = 1; i + 1 < G; ++i) {
        const double x = static_cast<double>(i) * h;
        vg[i] = (*gf)[i] - x * (1.0 - x) / (2.0 * static_cast<double>(n)) *
                               ((*gf)[i + 1] - 2.0 * (*gf)[i] + (*gf)[i - 1]) / (h * h);
      }
    std::vector<double> v(n + 1);
    const double scale = static_cast<double>(G - 1);
    for (std::uint64_t j = 0; j <= n; ++j) {
      const double x = static_cast<double>(j) / static_cast<double>(n) * scale;
      // cubic through the four nearest grid values
      const std::size_t i = std::min(G - 3, std::max<std::size_t>(1, static_cast<std::size_t>(x)));
      const double t = x - static_cast<double>(i);
      const double y0 = vg[i - 1], y1 = vg[i], y2 = vg[i + 1], y3 = vg[i + 2];
      v[j] = y1 + 0.5 * t * (y2 - y0 + t * (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3 + t * (3.0 * (y1 - y2) + y3 - y0)));
    }
    return v;
  };
}

struct SearchOutcome {
  SearchResult result;
  std::vector<double> nodes;
};

SearchOutcome search_impl(const NodeFn& node_fn, const std::vector<PointBound>& zeros,
                         const std::vector<PointBound>& ones, const std::vector<double>& grid,
                         const std::vector<double>& fvals, const SearchOptions& opt) {
  std::vector<SearchPoint> pts;
  for (const auto& b : zeros) pts.push_back({b, true});
  for (const auto& b : ones) pts.push_back({b, false});
  std::sort(pts.begin(), pts.end(), [](const SearchPoint& x, const SearchPoint& y) { return x.bound.point < y.bound.point; });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i].lo = i == 0 ? 0.0 : 0.5 * (pts[i - 1].bound.point + pts[i].bound.point);
    pts[i].hi = i + 1 == pts.size() ? 1.0 : 0.5 * (pts[i].bound.point + pts[i + 1].bound.point);
  }
  const std::size_t G = grid.size();
  const double h = grid.size() > 1 ? grid[1] - grid[0] : 1.0;

  std::uint64_t n = std::max<std::uint64_t>(1, opt.n_min);
  std::string last = "no candidate tried";
  for (std::size_t cand = 0; cand < opt.max_candidates && n <= opt.n_max; ++cand) {
    std::vector<double> nodes = node_fn(n);
    BoundingParams base;
    base.n = n;
    base.corrected_nodes = opt.bias_correction;
    base.grid = h;
    const BoundingPair plain(nodes, base);
    std::vector<double> A(G), C(G);  // A_n and 1 - B_n on the grid
    for (std::size_t i = 0; i < G; ++i) {
      A[i] = plain.lower(grid[i]);
      C[i] = 1.0 - plain.upper(grid[i]);
    }

    // per-point factor values on the grid, all-ones means "no factor"
    std::vector<std::vector<double>> T(pts.size(), std::vector<double>(G, 1.0));
    std::vector<int> choice(pts.size(), -1);
    auto make_t = [&](std::size_t idx, int c) {
      Heaviside t;
      t.center = pts[idx].bound.point;
      t.M = order_M(pts[idx].bound);
      const double base_m = (opt.bias_correction ? 2.0 : 1.0) * (at_boundary(t.center) ? 1.0 : 4.0) * static_cast<double>(n);
      t.m = static_cast<std::uint64_t>(std::max(1.0, std::round(opt.m_scales[static_cast<std::size_t>(c)] * base_m)));
      return t;
    };
    auto fill = [&](std::size_t idx, int c) {
      if (c < 0) {
        std::fill(T[idx].begin(), T[idx].end(), 1.0);
        return;
      }
      const Heaviside t = make_t(idx, c);
      for (std::size_t i = 0; i < G; ++i) T[idx][i] = heaviside_value(t, grid[i]);
    };
    auto cell_ok = [&](std::size_t idx) {
      for (std::size_t i = 0; i < G; ++i) {
        if (grid[i] < pts[idx].lo || grid[i] > pts[idx].hi) continue;
        double tz = 1.0, tw = 1.0;
        for (std::size_t q = 0; q < pts.size(); ++q) (pts[q].is_zero ? tz : tw) *= T[q][i];
        const double L = A[i] * tz;
        const double U = 1.0 - tw * C[i];
        if (L > fvals[i] + opt.tol || U < fvals[i] - opt.tol || U - L >= 0.5 - 1e-3) {
          return false;
        }
      }
      return true;
    };
    for (std::size_t idx = 0; idx < pts.size(); ++idx) {
      bool found = false;
      for (int c = -1; c < static_cast<int>(opt.m_scales.size()); ++c) {
        fill(idx, c);
        if (cell_ok(idx)) {
          choice[idx] = c;
          found = true;
          break;
        }
      }
      if (!found) {
        choice[idx] = 0;
        fill(idx, 0);
      }
    }

    BoundingParams params = base;
    for (std::size_t idx = 0; idx < pts.size(); ++idx) {
      if (choice[idx] < 0) continue;
      (pts[idx].is_zero ? params.zero_heavisides : params.one_heavisides).push_back(make_t(idx, choice[idx]));
    }
    std::vector<double> L(G), U(G);
    for (std::size_t i = 0; i < G; ++i) {
      double tz = 1.0, tw = 1.0;
      for (std::size_t q = 0; q < pts.size(); ++q) (pts[q].is_zero ? tz : tw) *= T[q][i];
      L[i] = A[i] * tz;
      U[i] = 1.0 - tw * C[i];
    }
    BoundAudit audit = audit_values(grid, fvals, L, U, opt.tol);
    if (audit.pass) return {{params, audit, cand + 1}, std::move(nodes)};
    last = "n=" + std::to_string(n) + ": " + audit.violated;
    n = std::max<std::uint64_t>(n + 1, static_cast<std::uint64_t>(std::ceil(static_cast<double>(n) * opt.n_growth)));
  }
  throw CertificationError("bounding-parameter search exhausted; last candidate " + last);
}

}  // namespace

BoundAudit audit_bounds(const BoundingPair& pair, const std::vector<double>& grid, const std::vector<double>& fvals,
                        double tol) {
  std::vector<double> L(grid.size()), U(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    L[i] = pair.lower(grid[i]);
    U[i] = pair.upper(grid[i]);
  }
  return audit_values(grid, fvals, L, U, tol);
}

SearchResult search_bounding_params_full(const SpbCertificate& cert, const SearchOptions& opt) {
  check_point_list(cert.zeros, "zero");
  check_point_list(cert.ones, "one");
  const std::vector<double> grid = uniform_grid(opt.grid_points);
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) f[i] = cert.f(grid[i]);
  return search_impl(exact_nodes(cert.f, opt.bias_correction), cert.zeros, cert.ones, grid, f, opt).result;
}

BoundingParams search_bounding_params(const SpbCertificate& cert, const SearchOptions& opt) {
  return search_bounding_params_full(cert, opt).params;
}

// ---- sampling ----

CoupledDraw sample_coupled(const BoundingPair& pair, const HiddenBias& bias, SamplingContext& ctx) {
  const std::uint64_t n = pair.params_.n;
  std::uint64_t heads = 0;
  for (std::uint64_t i = 0; i < n; ++i) heads += p_coin(bias, ctx) ? 1 : 0;
  LazyUniform u(ctx);
  const bool a = u.less_than(KnownProbability::dyadic(pair.a_[heads]));
  const bool b = u.less_than(KnownProbability::dyadic(pair.b_[heads]));
  CoupledDraw d;
  if (a) {
    d.l_event = true;
    for (std::size_t i = 0; i < pair.params_.zero_heavisides.size() && d.l_event; ++i)
      d.l_event = run_heaviside(pair.params_.zero_heavisides[i], pair.zero_rot_[i], bias, ctx);
  }
  if (b) {
    d.u_event = true;
  } else {
    bool all = true;
    for (std::size_t i = 0; i < pair.params_.one_heavisides.size() && all; ++i)
      all = run_heaviside(pair.params_.one_heavisides[i], pair.one_rot_[i], bias, ctx);
    d.u_event = !all;
  }
  pair.draws_.fetch_add(1, std::memory_order_relaxed);
  if (d.l_event && !d.u_event) pair.violations_.fetch_add(1, std::memory_order_relaxed);
  return d;
}

bool g_coin(const BoundingPair& pair, const HiddenBias& bias, SamplingContext& ctx) {
  for (;;) {
    const CoupledDraw d = sample_coupled(pair, bias, ctx);
    if (d.l_event) return true;  // u holds too
    if (!d.u_event) return false;
  }
}

// ---- chain ----

GkChain::GkChain(SpbCertificate base, ChainOptions opt)
    : base_(std::move(base)), opt_(std::move(opt)), grid_(uniform_grid(opt_.search.grid_points)) {
  if (!base_.f) throw ConfigError("certificate has no function");
}

std::size_t GkChain::built() const {
  std::lock_guard<std::mutex> lock(mu_);
  return levels_.size();
}

const SpbLevel& GkChain::level(std::size_t k) {
  if (k == 0) throw ConfigError("chain levels are numbered from 1");
  std::lock_guard<std::mutex> lock(mu_);
  if (k > opt_.max_levels) throw CertificationError("level " + std::to_string(k) + " beyond max_levels");
  while (levels_.size() < k) extend();
  return *levels_[k - 1];
}

void GkChain::extend() {
  const std::size_t k = levels_.size() + 1;
  auto lvl = std::make_unique<SpbLevel>();
  lvl->index = k;
  SearchOptions so = opt_.search;
  if (k == 1) {
    lvl->certificate = base_;
    lvl->grid_f.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) lvl->grid_f[i] = base_.f(grid_[i]);
  } else {
    const SpbLevel& prev = *levels_.back();
    std::vector<std::shared_ptr<const BoundingPair>> pairs;
    for (const auto& l : levels_) pairs.push_back(l->pair);
    auto basef = base_.f;
    SpbCertificate c;
    c.f = [basef, pairs](double p) {
      double v = basef(p);
      for (const auto& pr : pairs) v = (4.0 * v - pr->g(p)) / 3.0;
      return v;
    };
    c.zeros = prev.certificate.zeros;
    c.ones = prev.certificate.ones;
    for (auto& b : c.zeros) b.c *= kTwoThirds;
    for (auto& b : c.ones) b.c *= kTwoThirds;
    lvl->grid_f.resize(grid_.size());
    double steep = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double fk = prev.grid_f[i];
      const double fn = (4.0 * fk - prev.pair->g(grid_[i])) / 3.0;
      lvl->grid_f[i] = fn;
      if (fn < kTwoThirds * fk - opt_.tol || fn > 1.0 - kTwoThirds * (1.0 - fk) + opt_.tol)
        throw CertificationError("level " + std::to_string(k) + ": chain inequality (2/3)f_k <= f_k+1 <= 1-(2/3)(1-f_k) fails at p=" +
                                 num(grid_[i]));
      if (i > 0) steep = std::max(steep, std::fabs(fn - lvl->grid_f[i - 1]) / (grid_[i] - grid_[i - 1]));
    }
    c.lipschitz = std::max(2.0 * steep, 1e-9);  // numeric estimate with a factor 2 margin
    lvl->certificate = std::move(c);
    so.n_min = std::max<std::uint64_t>(
        so.n_min, static_cast<std::uint64_t>(std::ceil(opt_.n_growth * static_cast<double>(prev.pair->params().n))));
  }
  const SpbReport rep = verify_spb(lvl->certificate, grid_, lvl->grid_f);
  if (!rep.pass) throw CertificationError("level " + std::to_string(k) + ": " + rep.diagnostic());
  // Past the grid resolution the nodes are read off the exact grid values by
  // linear interpolation. L and U stay exactly known; the audit below still
  // compares them with the exact f_k.
  NodeFn nodes = exact_nodes(lvl->certificate.f, so.bias_correction);
  if (k > 1) {
    const NodeFn exact = nodes;
    const NodeFn coarse = grid_nodes(&lvl->grid_f, so.bias_correction);
    const std::size_t G = grid_.size();
    nodes = [exact, coarse, G](std::uint64_t n) { return n + 1 <= G ? exact(n) : coarse(n); };
  } else {
    so.n_min = std::max(so.n_min, opt_.n_first);
  }
  SearchOutcome res;
  try {
    res = search_impl(nodes, lvl->certificate.zeros, lvl->certificate.ones, grid_, lvl->grid_f, so);
  } catch (const CertificationError& e) {
    throw CertificationError("level " + std::to_string(k) + ": " + e.what());
  }
  lvl->pair = std::make_shared<const BoundingPair>(std::move(res.nodes), res.result.params);
  lvl->audit = res.result.audit;
  levels_.push_back(std::move(lvl));
}

double GkChain::f_value(std::size_t k, double p) const {
  double v = base_.f(p);
  for (std::size_t i = 0; i + 1 < k; ++i) v = (4.0 * v - levels_[i]->pair->g(p)) / 3.0;
  return v;
}

double GkChain::f(std::size_t k, double p) {
  if (k == 0) throw ConfigError("chain levels are numbered from 1");
  if (k > 1) level(k - 1);
  std::lock_guard<std::mutex> lock(mu_);
  return f_value(k, p);
}

double GkChain::g(std::size_t k, double p) { return level(k).pair->g(p); }

double GkChain::partial_sum(std::size_t K, double p) {
  double s = 0.0, w = 0.25;
  for (std::size_t k = 1; k <= K; ++k, w *= 0.75) s += w * g(k, p);
  return s;
}

std::uint64_t GkChain::coupled_draws() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::uint64_t s = 0;
  for (const auto& l : levels_) s += l->pair->coupled_draws();
  return s;
}

std::uint64_t GkChain::nesting_violations() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::uint64_t s = 0;
  for (const auto& l : levels_) s += l->pair->nesting_violations();
  return s;
}

nlohmann::json GkChain::summary() const {
  std::lock_guard<std::mutex> lock(mu_);
  nlohmann::json a = nlohmann::json::array();
  for (const auto& l : levels_) {
    nlohmann::json j = l->pair->params().to_json();
    j["level"] = l->index;
    j["max_gap"] = l->audit.max_gap;
    j["lipschitz"] = l->certificate.lipschitz;
    a.push_back(std::move(j));
  }
  return a;
}

bool spb_sample(GkChain& chain, const HiddenBias& bias, SamplingContext& ctx) {
  static const WeightSequence kLevels = WeightSequence::geometric(0.75);
  const std::uint64_t k = sample_index(kLevels, ctx);
  return g_coin(*chain.level(static_cast<std::size_t>(k)).pair, bias, ctx);
}

}  // namespace qbf
