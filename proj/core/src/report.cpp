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

#include "qbf/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace qbf {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

nlohmann::json Report::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["p"] = r.p;
    j["target"] = r.target ? nlohmann::json(*r.target) : nlohmann::json(nullptr);
    j["trials"] = r.stats.trials;
    j["heads"] = r.stats.heads;
    j["estimate"] = r.stats.estimate();
    j["ci_low"] = r.stats.wilson_low;
    j["ci_high"] = r.stats.wilson_high;
    j["z"] = r.stats.z;
    j["flips_mean"] = r.stats.flips_mean();
    j["exhausted"] = r.stats.exhausted;
    j["ledger"] = r.stats.ledger.to_json();
    rows_j.push_back(std::move(j));
  }
  return {{"meta", meta}, {"rows", rows_j}};
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "p,target,trials,heads,estimate,ci_low,ci_high,flips_mean\n";
  for (const auto& r : rows) {
    out << format_double(r.p) << ',' << (r.target ? format_double(*r.target) : std::string()) << ','
        << r.stats.trials << ',' << r.stats.heads << ',' << format_double(r.stats.estimate()) << ','
        << format_double(r.stats.wilson_low) << ',' << format_double(r.stats.wilson_high) << ','
        << format_double(r.stats.flips_mean()) << '\n';
  }
  return out.str();
}

}  // namespace qbf
