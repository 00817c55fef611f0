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
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbf/quoin.hpp"
#include "qbf/sampling_context.hpp"

namespace qbf {

// A declared zero (or one) of f: c (p - point)^(2k) <= f (resp. >= 1 - f)
// for |p - point| <= delta.
struct PointBound {
  double point = 0.0;
  double c = 1.0;
  int k = 1;
  double delta = 0.25;
};

struct SpbCertificate {
  std::function<double(double)> f;
  std::string expression;  // source text; empty for derived chain levels
  double lipschitz = 1.0;
  std::vector<PointBound> zeros;
  std::vector<PointBound> ones;

  // {"kind": "spb-certificate", "f": "...", "lipschitz": L, "zeros": [...], "ones": [...]}
  static SpbCertificate from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// T_{m,M,z}(p) = (1 - (1 - h_z(p))^m)^M
struct Heaviside {
  double center = 0.0;
  std::uint64_t m = 1;
  std::uint32_t M = 1;
};
double heaviside_value(const Heaviside& t, double p);

struct BoundingParams {
  std::uint64_t n = 1;
  std::vector<Heaviside> zero_heavisides;
  std::vector<Heaviside> one_heavisides;
  double grid = 1e-4;
  // nodes f(j/n) - (x(1-x)/2n) f''(j/n) instead of f(j/n)
  bool corrected_nodes = false;

  static BoundingParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Sum_j C(n,j) p^j (1-p)^(n-j) v[j] with n = v.size() - 1, skipping negligible terms.
double bernstein_sum(const std::vector<double>& v, double p);

struct CoupledDraw {
  bool l_event = false;
  bool u_event = false;
};

// L, U and the g-coin for one (f, params) pair with the Bernstein thresholds
// (2/3) f(j/n) and 1/3 + (2/3) f(j/n) precomputed. Read-only after construction
// apart from the coupling counters.
class BoundingPair {
 public:
  BoundingPair(const SpbCertificate& cert, BoundingParams params);
  BoundingPair(std::vector<double> node_values, BoundingParams params);

  const BoundingParams& params() const noexcept { return params_; }
  const std::vector<double>& lower_thresholds() const noexcept { return a_; }
  const std::vector<double>& upper_thresholds() const noexcept { return b_; }

  double lower(double p) const;
  double upper(double p) const;
  // L / (1 - U + L)
  double g(double p) const;

  std::uint64_t coupled_draws() const noexcept { return draws_.load(std::memory_order_relaxed); }
  std::uint64_t nesting_violations() const noexcept { return violations_.load(std::memory_order_relaxed); }

 private:
  friend CoupledDraw sample_coupled(const BoundingPair&, const HiddenBias&, SamplingContext&);
  struct Parts {
    double a = 0.0;      // A_n
    double one_b = 0.0;  // 1 - B_n
    double tz = 1.0;
    double tw = 1.0;
  };
  Parts parts(double p) const;
  void init(const std::vector<double>& nodes);

  BoundingParams params_;
  std::vector<double> a_, b_, one_b_;
  std::vector<RotationParam> zero_rot_, one_rot_;
  mutable std::atomic<std::uint64_t> draws_{0};
  mutable std::atomic<std::uint64_t> violations_{0};
};

double eval_L(const BoundingParams& params, const SpbCertificate& cert, double p);
double eval_U(const BoundingParams& params, const SpbCertificate& cert, double p);
double eval_g(const BoundingParams& params, const SpbCertificate& cert, double p);

struct SpbCheck {
  std::string condition;
  bool pass = true;
  double worst_p = 0.0;
  double worst_excess = 0.0;  // how far past the bound, <= 0 when passing
};

struct SpbReport {
  bool pass = true;
  std::vector<SpbCheck> checks;
  nlohmann::json to_json() const;
  // First failing check as "condition at p=...: excess ...", or empty.
  std::string diagnostic() const;
};

// Grid checks of the certificate: range, continuity proxy, declared zeros/ones
// and their polynomial bounds, f > 0 off Z, f < 1 off W.
SpbReport verify_spb(const SpbCertificate& cert, std::size_t grid_points = 10001);
SpbReport verify_spb(const SpbCertificate& cert, const std::vector<double>& grid, const std::vector<double>& fvals);

// Sandwich and gap audit of a bounding pair on a grid.
struct BoundAudit {
  bool pass = false;
  double max_gap = 0.0;
  double gap_slack = 0.0;  // Lipschitz allowance between grid points
  double worst_gap_p = 0.0;
  double lower_excess = 0.0;  // max(L - f)
  double lower_excess_p = 0.0;
  double upper_deficit = 0.0;  // max(f - U)
  double upper_deficit_p = 0.0;
  std::string violated;  // empty when passing
  nlohmann::json to_json() const;
};
BoundAudit audit_bounds(const BoundingPair& pair, const std::vector<double>& grid, const std::vector<double>& fvals,
                        double tol = 1e-13);

struct SearchOptions {
  std::uint64_t n_min = 1;
  std::uint64_t n_max = 1u << 26;
  double n_growth = 1.15;
  std::size_t grid_points = 10001;
  std::size_t max_candidates = 200;  // n values tried before giving up
  double tol = 1e-13;
  // Bernstein nodes f(j/n) - (x(1-x)/2n) f''(j/n) instead of f(j/n).
  bool bias_correction = true;
  // m = scale * base, base = 4n for interior points and n at 0 or 1, doubled with bias_correction. Tried in order after "no factor".
  std::vector<double> m_scales = {1.0, 1.25, 0.8, 1.6, 0.64, 2.0, 0.5, 2.5, 0.4, 3.2, 0.32,
                                  4.0, 0.25, 6.0, 0.16, 10.0, 0.1, 16.0, 32.0, 64.0};
};

struct SearchResult {
  BoundingParams params;
  BoundAudit audit;
  std::size_t candidates = 0;
};

// Staged search: n grows geometrically; for each n every declared point gets
// either no factor or T with M matched to its order and m from m_scales.
// Throws CertificationError naming the violated inequality and the worst p.
SearchResult search_bounding_params_full(const SpbCertificate& cert, const SearchOptions& opt = {});
BoundingParams search_bounding_params(const SpbCertificate& cert, const SearchOptions& opt = {});

CoupledDraw sample_coupled(const BoundingPair& pair, const HiddenBias& bias, SamplingContext& ctx);

// both -> heads, neither -> tails, only u -> draw again.
bool g_coin(const BoundingPair& pair, const HiddenBias& bias, SamplingContext& ctx);

struct ChainOptions {
  SearchOptions search;
  std::uint64_t n_first = 64;  // smallest degree tried at level 1
  double n_growth = 1.2;       // n_{k+1} >= n_growth * n_k
  std::size_t max_levels = 400;
  double tol = 1e-12;
};

struct SpbLevel {
  std::size_t index = 1;
  SpbCertificate certificate;
  std::shared_ptr<const BoundingPair> pair;
  BoundAudit audit;
  std::vector<double> grid_f;  // f_k on the audit grid
};

// f_1 = f, g_k = L_k/(1 - U_k + L_k), f_{k+1} = (4 f_k - g_k)/3, built lazily.
// Extension is serialized; built levels are immutable.
class GkChain {
 public:
  explicit GkChain(SpbCertificate base, ChainOptions opt = {});

  // Level k (1-based), building missing levels first. Throws CertificationError.
  const SpbLevel& level(std::size_t k);
  std::size_t built() const;

  double f(std::size_t k, double p);
  double g(std::size_t k, double p);
  // sum_{k<=K} (3/4)^(k-1) (1/4) g_k(p)
  double partial_sum(std::size_t K, double p);

  std::uint64_t coupled_draws() const;
  std::uint64_t nesting_violations() const;
  const std::vector<double>& grid() const noexcept { return grid_; }
  nlohmann::json summary() const;

 private:
  void extend();
  double f_value(std::size_t k, double p) const;

  SpbCertificate base_;
  ChainOptions opt_;
  std::vector<double> grid_;
  mutable std::mutex mu_;
  std::vector<std::unique_ptr<SpbLevel>> levels_;
};

// Draws K with P(K = k) = (1/4)(3/4)^(k-1) and runs the g-coin of level K.
bool spb_sample(GkChain& chain, const HiddenBias& bias, SamplingContext& ctx);

}  // namespace qbf
