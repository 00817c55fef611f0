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

#include "qbf/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "qbf/errors.hpp"

namespace qbf {

struct Expression::Node {
  enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
  Op op = Op::Num;
  double value = 0.0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double p) const {
    switch (op) {
      case Op::Num: return value;
      case Op::Var: return p;
      case Op::Add: return args[0]->eval(p) + args[1]->eval(p);
      case Op::Sub: return args[0]->eval(p) - args[1]->eval(p);
      case Op::Mul: return args[0]->eval(p) * args[1]->eval(p);
      case Op::Div: return args[0]->eval(p) / args[1]->eval(p);
      case Op::Pow: return std::pow(args[0]->eval(p), args[1]->eval(p));
      case Op::Neg: return -args[0]->eval(p);
      case Op::Call: return call(p);
    }
    return 0.0;
  }

  double call(double p) const {
    const double x = args[0]->eval(p);
    if (fn == "exp") return std::exp(x);
    if (fn == "log") return std::log(x);
    if (fn == "sqrt") return std::sqrt(x);
    if (fn == "abs") return std::fabs(x);
    if (fn == "sin") return std::sin(x);
    if (fn == "cos") return std::cos(x);
    if (fn == "tan") return std::tan(x);
    if (fn == "asin") return std::asin(x);
    if (fn == "acos") return std::acos(x);
    if (fn == "atan") return std::atan(x);
    const double y = args[1]->eval(p);
    if (fn == "min") return std::fmin(x, y);
    if (fn == "max") return std::fmax(x, y);
    return std::pow(x, y);  // pow
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

int arity(const std::string& fn) {
  static const char* one[] = {"exp", "log", "sqrt", "abs", "sin", "cos", "tan", "asin", "acos", "atan"};
  for (const char* f : one)
    if (fn == f) return 1;
  if (fn == "min" || fn == "max" || fn == "pow") return 2;
  return -1;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + s_ + "' column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Op op, std::vector<NodePtr> args = {}, double v = 0.0, std::string fn = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->args = std::move(args);
    n->value = v;
    n->fn = std::move(fn);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make(Op::Add, {lhs, term()});
      else if (eat('-'))
        lhs = make(Op::Sub, {lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = make(Op::Mul, {lhs, unary()});
      else if (eat('/'))
        lhs = make(Op::Div, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Op::Neg, {unary()});
    if (eat('+')) return unary();
    return power();
  }

  // right-associative; binds tighter than unary minus on its left: -p^2 = -(p^2)
  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(start, &end);
      if (end == start) fail("bad number");
      pos_ += static_cast<std::size_t>(end - start);
      return make(Op::Num, {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "p" || id == "x") return make(Op::Var);
      if (id == "pi") return make(Op::Num, {}, M_PI);
      if (id == "e") return make(Op::Num, {}, M_E);
      const int n = arity(id);
      if (n < 0) {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      if (!eat('(')) fail("expected '(' after " + id);
      std::vector<NodePtr> args{expr()};
      for (int i = 1; i < n; ++i) {
        if (!eat(',')) fail("expected ',' in " + id);
        args.push_back(expr());
      }
      if (!eat(')')) fail("expected ')' after arguments of " + id);
      return make(Op::Call, std::move(args), 0.0, id);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::operator()(double p) const {
  if (!root_) throw ConfigError("empty expression");
  return root_->eval(p);
}

}  // namespace qbf
