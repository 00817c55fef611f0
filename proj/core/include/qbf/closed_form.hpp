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
#include <string>
#include <vector>

#include "json.hpp"
#include "qbf/protocol.hpp"

namespace qbf::closed {

// 2 min(p, 1-p)
double f_wedge(double p);
// sin^2(asin sqrt(p) - asin sqrt(a))
double h(double a, double p);
double g1(double p);
// 1 - sqrt(1 - g)
double ladder(double g);
// (1 - (1 - h_z(p))^m)^M
double t(std::uint64_t m, std::uint64_t M, double z, double p);
double power(double x, std::uint64_t k);
// sum_k C(n,k) p^k (1-p)^(n-k) threshold(v_k)
double bernstein(const std::vector<double>& values, BernsteinMode mode, double p);
double f_alpha(double alpha, double a, double p);
// p(1-p) prod h_ai(p)(1 - h_ai(p))
double a_poly(const std::vector<double>& extended, double p);

// Algebraic value of a protocol tree, node by node. Throws UnsupportedStructure
// where no closed form is known.
double protocol_value(const Protocol& protocol, double p);

}  // namespace qbf::closed

namespace qbf {

// Catalog lookup: "f-wedge", "h", "g1", "t", "power", "bernstein", "f-alpha",
// "von-neumann", "a", "spb-L", "spb-U", "spb-g". Throws ConfigError on unknown
// ids or missing params.
double closed_form(const std::string& name, const nlohmann::json& params, double p);
std::vector<std::string> closed_form_names();

}  // namespace qbf
