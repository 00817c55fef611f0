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

#include <memory>
#include <string>

namespace qbf {

// A real function of one variable `p`, parsed from text such as "(2*p-1)^2",
// "exp(-1/p)" or "min(2*p, 1)". Operators: + - * / ^, unary minus.
// Functions: exp log sqrt abs sin cos tan asin acos atan min max pow.
// Constants: pi, e.
class Expression {
 public:
  Expression() = default;
  // Throws ConfigError with the offending column on bad input.
  static Expression parse(const std::string& text);

  double operator()(double p) const;
  const std::string& text() const noexcept { return text_; }
  bool valid() const noexcept { return static_cast<bool>(root_); }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace qbf
