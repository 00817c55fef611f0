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
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbf/sampling_context.hpp"

namespace qbf::cli {

enum ExitCode : int { kOk = 0, kConfig = 1, kBudget = 2, kCertification = 3, kUnsupported = 4 };

struct RunConfig {
  std::string command;
  // one of these, each inline JSON or a file path; protocol may also be a builtin name
  std::string protocol;
  std::string certificate;
  std::string target;
  std::vector<double> p;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  std::uint64_t budget = kDefaultBudget;
  std::string format = "json";  // json | csv
  std::string out;              // empty: stdout
  unsigned threads = 1;
  std::size_t grid_points = 10001;
};

struct CommandResult {
  int exit_code = kOk;
  std::string output;      // report text
  std::string diagnostic;  // one line for stderr, empty when clean
};

// "0.1,0.25,0.5"
std::vector<double> parse_p_list(const std::string& text);
// "lo:hi:count", count points spaced evenly with both ends included
std::vector<double> parse_p_grid(const std::string& text);
// "unlimited" or a positive integer
std::uint64_t parse_budget(const std::string& text);
// Inline JSON if the text starts with '{' or '[', otherwise a file path.
nlohmann::json load_json_ref(const std::string& ref, const char* what);

CommandResult cmd_simulate(const RunConfig& cfg);
CommandResult cmd_compile_spb(const RunConfig& cfg);
CommandResult cmd_verify_spb(const RunConfig& cfg);
CommandResult cmd_enumerate(const RunConfig& cfg);

// Parses argv, runs the command, writes the report to --out or `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qbf::cli
