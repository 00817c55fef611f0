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

#include "qbf/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "qbf/closed_form.hpp"
#include "qbf/errors.hpp"
#include "qbf/expression.hpp"
#include "qbf/known_probability.hpp"
#include "qbf/sample_index.hpp"

namespace qbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> read_points(const nlohmann::json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("'") + key + "' entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void sort_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Segment between consecutive zeros of a that contains x.
std::pair<double, double> zero_segment(const std::vector<double>& zs, double x) {
  auto it = std::upper_bound(zs.begin(), zs.end(), x);
  if (it == zs.begin()) return {zs.front(), zs.front()};
  if (it == zs.end()) return {zs.back(), zs.back()};
  return {*(it - 1), *it};
}

// Lower estimate of inf a over [lo, hi]: the grid minimum, halved.
double a_floor(const DomainSpec& spec, double lo, double hi, std::size_t points) {
  double m = kInf;
  for (std::size_t i = 0; i <= points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points);
    m = std::min(m, a_poly(spec, x));
  }
  return 0.5 * m;
}

struct Builder {
  const CoverTarget& f;
  const DomainSpec& spec;
  int l;
  const CoverOptions& opt;
  std::size_t cells_left;
  std::vector<CoverCell> cells;
  std::vector<std::pair<double, double>> holes;

  std::optional<CoverCell> test(double c, double d, double z_lo, double z_hi) const {
    const double eta = opt.overlap * (d - c);
    const double lo = std::max(z_lo, c - eta);
    const double hi = std::min(z_hi, d + eta);
    const double q = f.eval(0.5 * (c + d), 0);
    if (!std::isfinite(q) || q < 0.0 || q > 1.0) return std::nullopt;

    std::vector<double> cuts{lo};
    if (f.jumps_in) {
      auto js = f.jumps_in(lo, hi);
      cuts.insert(cuts.end(), js.begin(), js.end());
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());

    double osc = 0.0;
    bool exact = f.lipschitz == 0.0;
    const std::size_t n = std::max<std::size_t>(2, opt.check_points);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double u = cuts[s], v = cuts[s + 1];
      if (v <= u) continue;
      const double bin = (v - u) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = u + bin * (static_cast<double>(i) + 0.5);
        const double dv = std::fabs(f.eval(x, 0) - q);
        if (!std::isfinite(dv)) return std::nullopt;
        if (dv != 0.0) exact = false;
        osc = std::max(osc, dv + 0.5 * f.lipschitz * bin);
      }
    }
    if (!exact) {
      if (lo <= z_lo || hi >= z_hi) return std::nullopt;  // a vanishes at the end
      const double am = a_floor(spec, lo, hi, 128);
      if (!(osc < std::pow(am, l + 1))) return std::nullopt;
    }
    return CoverCell{lo, hi, c, d, q};
  }

  void add_hole(double c, double d) {
    if (!holes.empty() && holes.back().second == c)
      holes.back().second = d;
    else
      holes.emplace_back(c, d);
  }

  void refine(double c, double d, double z_lo, double z_hi, double min_width) {
    if (cells_left > 0) {
      if (auto cell = test(c, d, z_lo, z_hi)) {
        cells.push_back(*cell);
        --cells_left;
        return;
      }
    }
    if (d - c < min_width || cells_left == 0) {
      add_hole(c, d);
      return;
    }
    const double m = 0.5 * (c + d);
    refine(c, m, z_lo, z_hi, min_width);
    refine(m, d, z_lo, z_hi, min_width);
  }
};

// Locates the cell for p; side -1 prefers the cell ending at p.
long find_cell(const CoverSpec& c, double p, int side) {
  auto it = std::upper_bound(c.cells.begin(), c.cells.end(), p,
                             [](double x, const CoverCell& cell) { return x < cell.cut_lo; });
  if (it == c.cells.begin()) return -1;
  long i = static_cast<long>(it - c.cells.begin()) - 1;
  const auto& cell = c.cells[static_cast<std::size_t>(i)];
  if (side < 0 && p == cell.cut_lo && i > 0 && c.cells[static_cast<std::size_t>(i - 1)].cut_hi == p) return i - 1;
  if (p > cell.cut_hi) return -1;
  if (p == cell.cut_hi && side > 0 && static_cast<std::size_t>(i + 1) < c.cells.size() &&
      c.cells[static_cast<std::size_t>(i + 1)].cut_lo == p)
    return i + 1;
  return i;
}

bool meets(const std::pair<double, double>& a, const std::pair<double, double>& b) {
  return a.first < b.second && b.first < a.second;
}

}  // namespace

// ---------------------------------------------------------------------------

void DomainSpec::validate() {
  sort_unique(exclusions);
  if (extended.empty()) extended = exclusions;
  sort_unique(extended);
  for (double a : extended)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("extended points must lie in (0,1)");
  for (double a : exclusions)
    if (!std::binary_search(extended.begin(), extended.end(), a))
      throw ConfigError("extended list must contain every exclusion");
  if (k < 1) throw ConfigError("k must be a positive integer");
}

std::vector<std::pair<double, double>> DomainSpec::pieces() const {
  std::vector<std::pair<double, double>> out;
  double lo = 0.0;
  for (double a : exclusions) {
    out.emplace_back(lo, a);
    lo = a;
  }
  out.emplace_back(lo, 1.0);
  return out;
}

std::vector<double> DomainSpec::zeros() const {
  std::vector<double> z{0.0};
  z.insert(z.end(), extended.begin(), extended.end());
  z.push_back(1.0);
  return z;
}

DomainSpec DomainSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("domain must be a JSON object");
  DomainSpec d;
  d.exclusions = read_points(j, "exclusions");
  d.extended = read_points(j, "extended");
  if (j.contains("k")) {
    if (!j.at("k").is_number_integer()) throw ConfigError("'k' must be an integer");
    d.k = j.at("k").get<int>();
  }
  d.validate();
  return d;
}

nlohmann::json DomainSpec::to_json() const {
  return {{"exclusions", exclusions}, {"extended", extended}, {"k", k}};
}

double a_poly(const DomainSpec& spec, double p) { return closed::a_poly(spec.extended, p); }

// ---------------------------------------------------------------------------

const PiecewiseTarget::Piece& PiecewiseTarget::piece_at(double p) const {
  for (const auto& pc : pieces)
    if (p <= pc.hi) return pc;
  return pieces.back();
}

PiecewiseTarget PiecewiseTarget::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("target must be a JSON object");
  if (j.contains("kind") && j.at("kind") != "piecewise-target")
    throw ConfigError("expected kind 'piecewise-target'");
  PiecewiseTarget t;
  t.domain = DomainSpec::from_json(j);
  if (!j.contains("pieces") || !j.at("pieces").is_array()) throw ConfigError("'pieces' must be an array");
  const auto want = t.domain.pieces();
  const auto& arr = j.at("pieces");
  if (arr.size() != want.size())
    throw ConfigError("expected " + std::to_string(want.size()) + " pieces, got " + std::to_string(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& pj = arr[i];
    const std::string where = "pieces[" + std::to_string(i) + "]";
    Piece pc;
    pc.lo = want[i].first;
    pc.hi = want[i].second;
    if (pj.contains("interval")) {
      const auto& iv = pj.at("interval");
      if (!iv.is_array() || iv.size() != 2 || iv[0].get<double>() != pc.lo || iv[1].get<double>() != pc.hi)
        throw ConfigError(where + ".interval does not match the domain piece");
    }
    if (!pj.contains("f")) throw ConfigError(where + ".f missing");
    if (pj.at("f").is_number()) {
      const double c = pj.at("f").get<double>();
      pc.expression = pj.at("f").dump();
      pc.f = [c](double) { return c; };
      pc.lipschitz = 0.0;
    } else if (pj.at("f").is_string()) {
      auto e = Expression::parse(pj.at("f").get<std::string>());
      pc.expression = e.text();
      pc.f = [e](double p) { return e(p); };
      if (!pj.contains("lipschitz") || !pj.at("lipschitz").is_number())
        throw ConfigError(where + ".lipschitz missing");
    } else {
      throw ConfigError(where + ".f must be a number or an expression");
    }
    if (pj.contains("lipschitz")) pc.lipschitz = pj.at("lipschitz").get<double>();
    if (pc.lipschitz < 0.0) throw ConfigError(where + ".lipschitz must be non-negative");
    t.pieces.push_back(std::move(pc));
  }
  return t;
}

nlohmann::json PiecewiseTarget::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& pc : pieces)
    arr.push_back({{"interval", {pc.lo, pc.hi}}, {"f", pc.expression}, {"lipschitz", pc.lipschitz}});
  nlohmann::json j = domain.to_json();
  j["kind"] = "piecewise-target";
  j["pieces"] = arr;
  return j;
}

// ---------------------------------------------------------------------------

CoverSpec CoverSpec::from_intervals(const std::vector<std::pair<double, double>>& w, const std::vector<double>& q) {
  if (w.size() != q.size()) throw ConfigError("cover needs one constant per interval");
  std::vector<std::size_t> order(w.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a].first < w[b].first; });
  CoverSpec c;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto [lo, hi] = w[order[r]];
    if (!(lo < hi)) throw ConfigError("cover interval with lo >= hi");
    CoverCell cell{lo, hi, lo, hi, q[order[r]]};
    if (r > 0) {
      const auto& prev = w[order[r - 1]];
      if (lo < prev.second) cell.cut_lo = 0.5 * (lo + prev.second);
    }
    if (r + 1 < order.size()) {
      const auto& next = w[order[r + 1]];
      if (next.first < hi) cell.cut_hi = 0.5 * (next.first + hi);
    }
    if (!c.cells.empty() && c.cells.back().cut_hi < cell.cut_lo) c.holes.emplace_back(c.cells.back().cut_hi, cell.cut_lo);
    c.cells.push_back(cell);
  }
  return c;
}

CoverSpec CoverSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("cells") || !j.at("cells").is_array())
    throw ConfigError("cover must be an object with a 'cells' array");
  std::vector<std::pair<double, double>> w;
  std::vector<double> q;
  bool explicit_cuts = true;
  std::vector<CoverCell> cells;
  for (const auto& cj : j.at("cells")) {
    if (!cj.contains("w") || !cj.contains("q")) throw ConfigError("cover cells need 'w' and 'q'");
    const auto iv = cj.at("w").get<std::vector<double>>();
    if (iv.size() != 2) throw ConfigError("cover cell 'w' must be [lo, hi]");
    w.emplace_back(iv[0], iv[1]);
    q.push_back(cj.at("q").get<double>());
    if (cj.contains("f")) {
      const auto f = cj.at("f").get<std::vector<double>>();
      cells.push_back({iv[0], iv[1], f.at(0), f.at(1), q.back()});
    } else {
      explicit_cuts = false;
    }
  }
  CoverSpec c;
  if (explicit_cuts) {
    c.cells = std::move(cells);
    std::sort(c.cells.begin(), c.cells.end(), [](const CoverCell& a, const CoverCell& b) { return a.cut_lo < b.cut_lo; });
    if (j.contains("holes"))
      for (const auto& h : j.at("holes")) c.holes.emplace_back(h.at(0).get<double>(), h.at(1).get<double>());
  } else {
    c = from_intervals(w, q);
  }
  if (j.contains("accuracy")) c.accuracy = j.at("accuracy").get<int>();
  return c;
}

nlohmann::json CoverSpec::to_json() const {
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& c : cells) cj.push_back({{"w", {c.lo, c.hi}}, {"f", {c.cut_lo, c.cut_hi}}, {"q", c.q}});
  nlohmann::json hj = nlohmann::json::array();
  for (const auto& h : holes) hj.push_back({h.first, h.second});
  return {{"kind", "cover"}, {"accuracy", accuracy}, {"cells", cj}, {"holes", hj}};
}

CoverTarget CoverTarget::from(const PiecewiseTarget& t) {
  CoverTarget c;
  const auto* tp = &t;
  c.eval = [tp](double p, int side) {
    for (std::size_t i = 0; i < tp->pieces.size(); ++i) {
      const auto& pc = tp->pieces[i];
      if (p < pc.hi || (p == pc.hi && (side < 0 || i + 1 == tp->pieces.size()))) return pc.f(p);
    }
    return tp->pieces.back().f(p);
  };
  c.jumps_in = [](double, double) { return std::vector<double>{}; };  // pieces end at zeros of a
  for (const auto& pc : t.pieces) c.lipschitz = std::max(c.lipschitz, pc.lipschitz);
  return c;
}

// ---------------------------------------------------------------------------

CoverSpec build_cover(const CoverTarget& f, const DomainSpec& spec, int l, const CoverOptions& opt) {
  if (l < 1) throw ConfigError("cover accuracy must be a positive integer");
  Builder b{f, spec, l, opt, opt.max_cells, {}, {}};
  const auto zs = spec.zeros();
  for (std::size_t i = 0; i + 1 < zs.size(); ++i) b.refine(zs[i], zs[i + 1], zs[i], zs[i + 1], opt.min_width);
  CoverSpec c;
  c.cells = std::move(b.cells);
  c.holes = std::move(b.holes);
  c.accuracy = l;
  return c;
}

CoverSpec build_cover(const PiecewiseTarget& f, int l, const CoverOptions& opt) {
  return build_cover(CoverTarget::from(f), f.domain, l, opt);
}

long audit_cover(const CoverSpec& cover, const CoverTarget& f, const DomainSpec& spec, std::size_t grid_points) {
  for (std::size_t i = 0; i < cover.cells.size(); ++i) {
    const auto& c = cover.cells[i];
    for (std::size_t g = 0; g < grid_points; ++g) {
      const double x = static_cast<double>(g) / static_cast<double>(grid_points - 1);
      if (!(x > c.lo && x < c.hi)) continue;
      if (!(std::fabs(f.eval(x, 0) - c.q) < std::pow(a_poly(spec, x), cover.accuracy + 1)))
        return static_cast<long>(i);
    }
  }
  return -1;
}

// ---------------------------------------------------------------------------

LazyCover::LazyCover(CoverTarget f, DomainSpec spec, int l, CoverOptions opt)
    : f_(std::move(f)), spec_(std::move(spec)), opt_(opt) {
  cover_ = std::make_shared<const CoverSpec>(build_cover(f_, spec_, l, opt_));
}

LazyCover::LazyCover(CoverSpec cover, DomainSpec spec)
    : spec_(std::move(spec)), refinable_(false), cover_(std::make_shared<const CoverSpec>(std::move(cover))) {}

std::shared_ptr<const CoverSpec> LazyCover::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cover_;
}

int LazyCover::accuracy() const { return snapshot()->accuracy; }

std::optional<double> LazyCover::q_at(double p, int side) const {
  const auto c = snapshot();
  const long i = find_cell(*c, p, side);
  if (i < 0) return std::nullopt;
  return c->cells[static_cast<std::size_t>(i)].q;
}

void LazyCover::breakpoints(double lo, double hi, std::vector<double>& out) const {
  const auto c = snapshot();
  auto push = [&](double x) {
    if (x > lo && x < hi) out.push_back(x);
  };
  auto it = std::lower_bound(c->cells.begin(), c->cells.end(), lo,
                             [](const CoverCell& cell, double x) { return cell.cut_hi < x; });
  for (; it != c->cells.end() && it->cut_lo < hi; ++it) {
    push(it->cut_lo);
    push(it->cut_hi);
  }
  for (const auto& h : c->holes) {
    push(h.first);
    push(h.second);
  }
}

void LazyCover::ensure(const std::vector<std::pair<double, double>>& region) {
  std::lock_guard<std::mutex> lock(mu_);
  for (int round = 0;; ++round) {
    std::vector<std::pair<double, double>> hit;
    for (const auto& h : cover_->holes)
      for (const auto& r : region)
        if (meets(h, r)) {
          hit.push_back(h);
          break;
        }
    if (hit.empty()) return;
    if (!refinable_)
      throw CertificationError("cover too coarse: hole [" + std::to_string(hit.front().first) + ", " +
                               std::to_string(hit.front().second) + "] meets the pinpoint region");
    if (cover_->cells.size() >= opt_.max_cells || round > 200)
      throw CertificationError("cover cell budget exhausted near p=" + std::to_string(hit.front().first));

    CoverSpec next = *cover_;
    const auto zs = spec_.zeros();
    Builder b{f_, spec_, next.accuracy, opt_, opt_.max_cells - next.cells.size(), {}, {}};
    std::vector<std::pair<double, double>> kept;
    for (const auto& h : next.holes) {
      if (std::find(hit.begin(), hit.end(), h) == hit.end()) {
        kept.push_back(h);
        continue;
      }
      const auto seg = zero_segment(zs, 0.5 * (h.first + h.second));
      b.refine(h.first, h.second, seg.first, seg.second, (h.second - h.first) / 64.0);
    }
    next.cells.insert(next.cells.end(), b.cells.begin(), b.cells.end());
    std::sort(next.cells.begin(), next.cells.end(), [](const CoverCell& x, const CoverCell& y) { return x.cut_lo < y.cut_lo; });
    kept.insert(kept.end(), b.holes.begin(), b.holes.end());
    std::sort(kept.begin(), kept.end());
    next.holes = std::move(kept);
    cover_ = std::make_shared<const CoverSpec>(std::move(next));
  }
}

double LazyCover::exclusion_radius(std::size_t zero, int side, std::uint64_t m_max, int accuracy) {
  const auto key = std::make_tuple(zero, side, m_max, accuracy);
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = radius_cache_.find(key);
    if (it != radius_cache_.end()) return it->second;
  }
  const auto zs = spec_.zeros();
  const double z = zs.at(zero);
  const double reach = side > 0 ? zs.at(zero + 1) - z : z - zs.at(zero - 1);
  const double np = static_cast<double>(spec_.extended.size());
  const double T = np * accuracy + 2.0 * accuracy + 1.0;
  const double floor_log = -std::log(2.0 * (np + 2.0));
  // P_p(phase 1 ends within m_max flips) <= P(Bin(m_max, x) >= T) = I_x(T, m_max - T + 1),
  // x the per-flip chance of the awaited outcome: h_z(p), or p at 0, or 1-p at 1.
  auto ok = [&](double p) {
    double x;
    if (zero == 0)
      x = p;
    else if (zero + 1 == zs.size())
      x = 1.0 - p;
    else
      x = h_bias(z, p);
    const double lhs = boost::math::ibeta(T, static_cast<double>(m_max) - T + 1.0, std::clamp(x, 0.0, 1.0));
    const double a = a_poly(spec_, p);
    if (!(a > 0.0)) return false;
    return std::log(lhs) < accuracy * std::log(a) + floor_log;
  };
  double eps = 0.0;
  for (double d = 1e-12; d < reach; d *= 1.02) {
    if (!ok(z + side * d)) break;
    eps = d;
  }
  std::lock_guard<std::mutex> lock(cache_mu_);
  radius_cache_[key] = eps;
  return eps;
}

// ---------------------------------------------------------------------------

PinpointResult pinpoint_interval(LazyCover& cover, int accuracy, const HiddenBias& bias, SamplingContext& ctx) {
  if (accuracy < 1) throw ConfigError("pinpoint accuracy must be a positive integer");
  const DomainSpec& spec = cover.spec();
  const auto zs = spec.zeros();
  const std::uint64_t np = spec.extended.size();
  const std::uint64_t T = np * static_cast<std::uint64_t>(accuracy) + 2u * static_cast<std::uint64_t>(accuracy) + 1u;

  // phase 1
  std::uint64_t m_max = 0;
  for (double a : spec.extended) {
    const RotationParam rot(a);
    std::uint64_t ones = 0, m = 0;
    while (ones < T) {
      ++m;
      if (h_coin(rot, bias, ctx) == 1) ++ones;
    }
    m_max = std::max(m_max, m);
  }
  {
    std::uint64_t heads = 0, tails = 0, m = 0;
    while (heads < T || tails < T) {
      ++m;
      if (p_coin(bias, ctx))
        ++heads;
      else
        ++tails;
    }
    m_max = std::max(m_max, m);
  }

  // surviving region: [0,1] minus the windows around zeros of a
  std::vector<std::pair<double, double>> region;
  double start = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double left = i > 0 ? cover.exclusion_radius(i, -1, m_max, accuracy) : 0.0;
    const double right = i + 1 < zs.size() ? cover.exclusion_radius(i, +1, m_max, accuracy) : 0.0;
    if ((i > 0 && left <= 0.0) || (i + 1 < zs.size() && right <= 0.0))
      throw CertificationError("pinpoint: no exclusion window around " + std::to_string(zs[i]) +
                               " after m_max=" + std::to_string(m_max));
    if (i > 0) {
      const double end = zs[i] - left;
      if (end > start) region.emplace_back(start, end);
    }
    start = zs[i] + right;
  }

  double a_min = kInf;
  for (const auto& [u, v] : region) a_min = std::min(a_min, a_floor(spec, u, v, 1024));
  const double log_delta = accuracy * std::log(a_min);

  cover.ensure(region);
  const auto cov = cover.snapshot();

  // closed cells clipped to the region, with their distance to the outside of W
  struct Seg {
    std::size_t cell;
    double u, v;
  };
  std::vector<Seg> segs;
  double margin = kInf;
  for (std::size_t i = 0; i < cov->cells.size(); ++i) {
    const auto& c = cov->cells[i];
    for (const auto& [u, v] : region) {
      const double x = std::max(u, c.cut_lo), y = std::min(v, c.cut_hi);
      if (x > y) continue;
      segs.push_back({i, x, y});
      if (c.lo > 0.0) margin = std::min(margin, x - c.lo);
      if (c.hi < 1.0) margin = std::min(margin, c.hi - y);
    }
  }
  if (segs.empty() || !(margin > 0.0))
    throw CertificationError("cover too coarse: no positive margin between the cells and their intervals");

  // Hoeffding: 2 exp(-2 N t^2) < delta / 2
  const double nf = std::ceil((std::log(4.0) - log_delta) / (2.0 * margin * margin)) + 1.0;
  if (!(nf < 1e15)) throw CertificationError("pinpoint: frequency estimate needs too many flips");
  const auto N = static_cast<std::uint64_t>(nf);
  if (N > ctx.remaining()) throw BudgetExhausted("pinpoint needs " + std::to_string(N) + " p-coins", ctx.ledger());
  std::uint64_t heads = 0;
  for (std::uint64_t i = 0; i < N; ++i) heads += p_coin(bias, ctx) ? 1u : 0u;
  const double est = static_cast<double>(heads) / static_cast<double>(N);

  std::size_t best = segs.front().cell;
  double best_d = kInf;
  for (const auto& s : segs) {
    const double d = est < s.u ? s.u - est : (est > s.v ? est - s.v : 0.0);
    if (d < best_d) {
      best_d = d;
      best = s.cell;
    }
  }
  PinpointResult r;
  r.index = best;
  r.m_max = m_max;
  r.n_flips = N;
  r.q = cov->cells[best].q;
  r.estimate = est;
  r.delta = std::exp(log_delta);
  r.margin = margin;
  return r;
}

PinpointResult pinpoint_interval(const DomainSpec& spec, const CoverSpec& cover, const HiddenBias& bias,
                                 SamplingContext& ctx) {
  LazyCover lc(cover, spec);
  return pinpoint_interval(lc, spec.k, bias, ctx);
}

bool approx_event(LazyCover& cover, int l, const HiddenBias& bias, SamplingContext& ctx) {
  const PinpointResult r = pinpoint_interval(cover, l + 1, bias, ctx);
  return bernoulli_known(KnownProbability::dyadic(r.q), ctx);
}

// ---------------------------------------------------------------------------

struct DyadicSampler::Level {
  std::unique_ptr<LazyCover> cover;
};

DyadicSampler::DyadicSampler(PiecewiseTarget target, DyadicOptions opt) : target_(std::move(target)), opt_(opt) {
  target_.domain.validate();
  base_ = CoverTarget::from(target_);
  levels_.reserve(opt_.max_levels);
  const int k = target_.domain.k;
  const auto& base = base_;
  const std::size_t G = std::max<std::size_t>(3, opt_.grid_points);
  for (std::size_t i = 1; i + 1 < G; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(G - 1);
    const double a = std::pow(a_poly(target_.domain, x), k);
    if (!(a > 0.0)) continue;
    const double v = base.eval(x, 0);
    if (!(a < v && v < 1.0 - a))
      throw CertificationError("target violates a^k < f < 1 - a^k at p=" + std::to_string(x));
  }
}

DyadicSampler::~DyadicSampler() = default;

double DyadicSampler::residual_value(std::size_t j, double p, int side) const {
  double v = base_.eval(p, side);
  for (std::size_t i = 0; i < j; ++i) {
    const auto q = levels_[i]->cover->q_at(p, side);
    if (q) v = 2.0 * v - *q;  // inside a hole the level adds nothing: r_i = r_(i-1)
  }
  return v;
}

void DyadicSampler::build_to(std::size_t level) {
  if (level > opt_.max_levels)
    throw CertificationError("dyadic level " + std::to_string(level) + " beyond max_levels");
  if (built_.load() >= level) return;
  std::lock_guard<std::mutex> lock(mu_);
  const int k = target_.domain.k;
  double lip = 0.0;
  for (const auto& pc : target_.pieces) lip = std::max(lip, pc.lipschitz);
  while (levels_.size() < level) {
    const std::size_t j = levels_.size() + 1;  // covers r_(j-1)
    CoverTarget t;
    t.eval = [this, j](double p, int side) { return residual_value(j - 1, p, side); };
    t.jumps_in = [this, j](double lo, double hi) {
      std::vector<double> out;
      for (std::size_t i = 0; i + 1 < j; ++i) levels_[i]->cover->breakpoints(lo, hi, out);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    };
    t.lipschitz = std::ldexp(lip, static_cast<int>(j - 1));
    if (j > 1) {
      const double worst = [&] {
        const std::size_t G = std::max<std::size_t>(3, opt_.grid_points);
        double w = -kInf;
        for (std::size_t g = 1; g + 1 < G; ++g) {
          const double x = static_cast<double>(g) / static_cast<double>(G - 1);
          const double a = std::pow(a_poly(target_.domain, x), k + static_cast<int>(j) - 1);
          if (!(a > 0.0)) continue;
          const double r = t.eval(x, 0);
          w = std::max({w, a - r, r - (1.0 - a)});
        }
        return w;
      }();
      if (!(worst < 0.0))
        throw CertificationError("level " + std::to_string(j) + ": residual bound violated by " + std::to_string(worst));
    }
    auto lvl = std::make_unique<Level>();
    lvl->cover = std::make_unique<LazyCover>(std::move(t), target_.domain, k + static_cast<int>(j), opt_.cover);
    levels_.push_back(std::move(lvl));
    built_.store(levels_.size());
  }
}

bool DyadicSampler::sample(const HiddenBias& bias, SamplingContext& ctx) {
  static const WeightSequence halves = WeightSequence::geometric(0.5);
  const std::uint64_t n = sample_index(halves, ctx);
  build_to(n);
  return approx_event(*levels_[n - 1]->cover, target_.domain.k + static_cast<int>(n), bias, ctx);
}

double DyadicSampler::residual(std::size_t j, double p) {
  build_to(j);
  return residual_value(j, p, 0);
}

double DyadicSampler::residual_bound_excess(std::size_t j) {
  build_to(j);
  const int k = target_.domain.k;
  const std::size_t G = std::max<std::size_t>(3, opt_.grid_points);
  double w = -kInf;
  for (std::size_t g = 1; g + 1 < G; ++g) {
    const double x = static_cast<double>(g) / static_cast<double>(G - 1);
    const double a = std::pow(a_poly(target_.domain, x), k + static_cast<int>(j));
    if (!(a > 0.0)) continue;
    const double r = residual_value(j, x, 0);
    w = std::max({w, a - r, r - (1.0 - a)});
  }
  return w;
}

LazyCover& DyadicSampler::cover(std::size_t level) {
  if (level == 0) throw ConfigError("dyadic levels are numbered from 1");
  build_to(level);
  return *levels_[level - 1]->cover;
}

std::size_t DyadicSampler::built() const { return built_.load(); }

}  // namespace qbf
