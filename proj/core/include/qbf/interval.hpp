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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbf/quoin.hpp"
#include "qbf/sampling_context.hpp"

namespace qbf {

// Domain (0,a_1) u (a_1,a_2) u ... u (a_n,1) with an extended point list
// a_1..a_n' (exclusions plus interior zeros/ones of the target) and order k.
struct DomainSpec {
  std::vector<double> exclusions;
  std::vector<double> extended;
  int k = 1;

  // Sorts, and checks points lie in (0,1), are distinct, and extended contains exclusions.
  void validate();
  // Open pieces between 0, the exclusions and 1.
  std::vector<std::pair<double, double>> pieces() const;
  // Where a(p) vanishes: 0, the extended points and 1, sorted.
  std::vector<double> zeros() const;

  static DomainSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// a(p) = p(1-p) prod_i h_{a_i}(p)(1 - h_{a_i}(p)) over the extended list.
double a_poly(const DomainSpec& spec, double p);

// f given piece by piece, continuous on each piece with a Lipschitz bound.
struct PiecewiseTarget {
  struct Piece {
    double lo = 0.0;
    double hi = 1.0;
    std::string expression;
    std::function<double(double)> f;
    double lipschitz = 0.0;
  };
  DomainSpec domain;
  std::vector<Piece> pieces;

  // Piece containing p (p must not be an exclusion).
  const Piece& piece_at(double p) const;
  double operator()(double p) const { return piece_at(p).f(p); }

  // {"kind": "piecewise-target", "exclusions": [...], "extended": [...], "k": 1,
  //  "pieces": [{"interval": [lo, hi], "f": "...", "lipschitz": L}, ...]}
  static PiecewiseTarget from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// One cover interval W = (lo, hi) with its closed cell F = [cut_lo, cut_hi]
// and constant q. Cells of a cover do not overlap.
struct CoverCell {
  double lo = 0.0;
  double hi = 1.0;
  double cut_lo = 0.0;
  double cut_hi = 1.0;
  double q = 0.5;
};

struct CoverSpec {
  std::vector<CoverCell> cells;  // sorted by cut_lo
  std::vector<std::pair<double, double>> holes;  // parts of the domain with no cell yet
  int accuracy = 1;  // cells satisfy |f - q| < a^(accuracy+1) on W

  // Cells from plain open intervals; cuts go to overlap midpoints.
  static CoverSpec from_intervals(const std::vector<std::pair<double, double>>& w, const std::vector<double>& q);
  static CoverSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// A function with jump points and a Lipschitz bound between them. side is
// -1 for the left limit, +1 for the right limit, 0 for the value.
struct CoverTarget {
  std::function<double(double, int)> eval;
  // jump points strictly inside (lo, hi)
  std::function<std::vector<double>(double, double)> jumps_in;
  double lipschitz = 0.0;

  static CoverTarget from(const PiecewiseTarget& t);
};

struct CoverOptions {
  double min_width = 1e-4;       // cells narrower than this become holes
  std::size_t max_cells = 200000;
  std::size_t check_points = 33;  // samples per cell in the oscillation check
  double overlap = 0.25;          // W extends the cell by this fraction of its width
};

// Greedy bisection of each piece until on every W the oscillation of f
// around q = f(midpoint) is below inf a^(l+1). Near zeros of a the remaining
// strip is left as a hole.
CoverSpec build_cover(const CoverTarget& f, const DomainSpec& spec, int l, const CoverOptions& opt = {});
CoverSpec build_cover(const PiecewiseTarget& f, int l, const CoverOptions& opt = {});

// Oscillation check of every cell on a grid; returns the first failing cell index or -1.
long audit_cover(const CoverSpec& cover, const CoverTarget& f, const DomainSpec& spec, std::size_t grid_points = 1001);

// A cover that refines its holes on demand. Refinement is serialized.
class LazyCover {
 public:
  LazyCover(CoverTarget f, DomainSpec spec, int l, CoverOptions opt = {});
  // A fixed cover that cannot be refined.
  LazyCover(CoverSpec cover, DomainSpec spec);

  // Refines until no hole meets `region`; throws CertificationError if the cell budget runs out
  // or the cover is fixed.
  void ensure(const std::vector<std::pair<double, double>>& region);
  std::shared_ptr<const CoverSpec> snapshot() const;
  const DomainSpec& spec() const noexcept { return spec_; }
  int accuracy() const;
  // q of the cell holding p (side as in CoverTarget), or nothing inside a hole.
  std::optional<double> q_at(double p, int side) const;
  // Cell cuts and hole ends strictly inside (lo, hi).
  void breakpoints(double lo, double hi, std::vector<double>& out) const;

  // Exclusion radius around zero `zero` of a on side +1/-1 after phase 1 of the
  // pinpoint procedure saw m_max flips. Memoized.
  double exclusion_radius(std::size_t zero, int side, std::uint64_t m_max, int accuracy);

 private:
  CoverTarget f_;
  DomainSpec spec_;
  CoverOptions opt_;
  bool refinable_ = true;
  mutable std::mutex mu_;
  std::shared_ptr<const CoverSpec> cover_;
  std::mutex cache_mu_;
  std::map<std::tuple<std::size_t, int, std::uint64_t, int>, double> radius_cache_;
};

struct PinpointResult {
  std::size_t index = 0;  // cell index in the cover
  std::uint64_t m_max = 0;
  std::uint64_t n_flips = 0;  // N of the frequency estimate
  double q = 0.5;
  double estimate = 0.0;
  double delta = 0.0;
  double margin = 0.0;
};

// Guesses the cover interval containing p with error probability below
// a^accuracy(p). Phase 1 flips h_{a_i}-coins until T ones for every extended
// point and p-coins until T heads and T tails, T = n'K + 2K + 1; m_max bounds
// exclusion windows around the zeros of a. Phase 2 estimates p from N p-coins
// with N set by Hoeffding so a miss beyond the cell margin has probability < delta/2.
PinpointResult pinpoint_interval(LazyCover& cover, int accuracy, const HiddenBias& bias, SamplingContext& ctx);
PinpointResult pinpoint_interval(const DomainSpec& spec, const CoverSpec& cover, const HiddenBias& bias,
                                 SamplingContext& ctx);

// Pinpoints at accuracy l+1 and emits a q-coin of the chosen cell.
bool approx_event(LazyCover& cover, int l, const HiddenBias& bias, SamplingContext& ctx);

struct DyadicOptions {
  CoverOptions cover;
  std::size_t max_levels = 64;
  std::size_t grid_points = 2001;
};

// f = sum_n 2^-n f_n with f_n an approximation of the residual r_(n-1) to
// accuracy k+n, r_n = 2 r_(n-1) - f_n. Levels are built lazily.
class DyadicSampler {
 public:
  // Throws CertificationError if a^k < f < 1 - a^k fails on the grid.
  explicit DyadicSampler(PiecewiseTarget target, DyadicOptions opt = {});
  ~DyadicSampler();

  bool sample(const HiddenBias& bias, SamplingContext& ctx);

  // Residual r_j (r_0 = f), built through level j.
  double residual(std::size_t j, double p);
  // max over the grid of a^(k+j) - r_j and r_j - (1 - a^(k+j)); negative when the bounds hold.
  double residual_bound_excess(std::size_t j);
  LazyCover& cover(std::size_t level);
  std::size_t built() const;
  const PiecewiseTarget& target() const noexcept { return target_; }

 private:
  struct Level;
  void build_to(std::size_t level);
  double residual_value(std::size_t j, double p, int side) const;

  PiecewiseTarget target_;
  CoverTarget base_;
  DyadicOptions opt_;
  mutable std::mutex mu_;
  std::vector<std::unique_ptr<Level>> levels_;  // reserved up front, so readers never see a reallocation
  std::atomic<std::size_t> built_{0};
};

}  // namespace qbf
