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

#include "qbf/protocol.hpp"

namespace qbf {

// Exact P(heads) by enumerating outcome traces with their weights. Retry rounds
// are summed as geometric series. Throws UnsupportedStructure for ladders,
// infinite non-geometric series, oversized Bernstein nodes, and retries that
// never decide at this p.
double exact_prob_enum(const Protocol& protocol, double p);

}  // namespace qbf
