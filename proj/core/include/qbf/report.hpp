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

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbf/stats.hpp"

namespace qbf {

struct ReportRow {
  double p = 0.0;
  std::optional<double> target;
  RunStats stats;
};

// Output of a simulate run. Rows keep the order they were added (the CLI sorts by p).
struct Report {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<ReportRow> rows;

  nlohmann::json to_json() const;
  // Columns: p,target,trials,heads,estimate,ci_low,ci_high,flips_mean
  std::string to_csv() const;
};

// Shortest text that reads back to the same double.
std::string format_double(double x);

}  // namespace qbf
