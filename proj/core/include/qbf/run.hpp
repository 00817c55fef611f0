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
#include <vector>

#include "qbf/protocol.hpp"
#include "qbf/quoin.hpp"
#include "qbf/sampling_context.hpp"

namespace qbf {

// One execution of a protocol; true is heads.
bool run(const Protocol& protocol, const HiddenBias& bias, SamplingContext& ctx);

bool von_neumann(const HiddenBias& bias, SamplingContext& ctx);
bool power_coin(const Protocol& inner, std::uint64_t k, const HiddenBias& bias, SamplingContext& ctx);
bool g1_coin(const HiddenBias& bias, SamplingContext& ctx);
std::uint64_t qk_index(SamplingContext& ctx);
bool f_wedge_series(const HiddenBias& bias, SamplingContext& ctx);
bool f_wedge_ladder(const HiddenBias& bias, SamplingContext& ctx);
bool t_coin(std::uint64_t m, std::uint64_t M, const RotationParam& z, const HiddenBias& bias, SamplingContext& ctx);
bool bernstein_coin(const std::function<double(double)>& f, std::uint32_t n, BernsteinMode mode,
                    const HiddenBias& bias, SamplingContext& ctx);
bool convex_mix(const std::vector<double>& weights, const std::vector<Protocol>& protocols,
                const HiddenBias& bias, SamplingContext& ctx);

}  // namespace qbf
