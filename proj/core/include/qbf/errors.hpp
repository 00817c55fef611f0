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

#include <stdexcept>
#include <string>

#include "qbf/flip_ledger.hpp"

namespace qbf {

// Bad user input: malformed protocol trees, weights that overflow 1, p out of range.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A digit producer or other lazy source failed mid-sample.
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The per-trial raw-sample budget ran out. Carries what was consumed so far.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(const std::string& what, FlipLedger partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const FlipLedger& partial_ledger() const noexcept { return partial_; }

 private:
  FlipLedger partial_;
};

// Certificate or bounding-pair checks failed.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The enumeration oracle cannot handle this protocol shape.
class UnsupportedStructure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qbf
