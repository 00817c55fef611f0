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

#include "qbf/known_probability.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "qbf/errors.hpp"

namespace qbf {

KnownProbability KnownProbability::dyadic(double q) {
  if (!std::isfinite(q) || q < 0.0 || q > 1.0)
    throw ConfigError("known probability out of [0,1]: " + std::to_string(q));
  KnownProbability k;
  k.kind_ = Kind::Dyadic;
  k.approx_ = q;
  if (q == 1.0) {
    k.one_ = true;
    return k;
  }
  if (q > 0.0) {
    int e = 0;
    const double f = std::frexp(q, &e);
    k.mant_ = static_cast<std::uint64_t>(std::ldexp(f, 53));
    k.exp2_ = e - 53;
  }
  return k;
}

KnownProbability KnownProbability::rational(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || num > den) throw ConfigError("rational probability must satisfy 0 <= num <= den, den > 0");
  if (den >= (std::uint64_t{1} << 63)) throw ConfigError("rational denominator too large");
  KnownProbability k;
  k.kind_ = Kind::Rational;
  k.num_ = num;
  k.den_ = den;
  k.one_ = num == den;
  k.approx_ = static_cast<double>(num) / static_cast<double>(den);
  return k;
}

KnownProbability KnownProbability::from_digits(DigitFn digits, double approx) {
  KnownProbability k;
  k.kind_ = Kind::Digits;
  k.digits_ = std::make_shared<DigitFn>(std::move(digits));
  k.approx_ = approx;
  return k;
}

bool KnownProbability::is_zero() const noexcept {
  switch (kind_) {
    case Kind::Dyadic: return !one_ && mant_ == 0;
    case Kind::Rational: return num_ == 0;
    case Kind::Digits: return false;
  }
  return false;
}

KnownProbability::Cursor::Cursor(const KnownProbability& q) : q_(&q), rem_(q.num_) {}

int KnownProbability::Cursor::next() {
  ++pos_;
  switch (q_->kind_) {
    case Kind::Dyadic: {
      if (q_->one_) return 1;
      const long long sh = static_cast<long long>(q_->exp2_) + static_cast<long long>(pos_);
      if (sh > 0) return 0;
      if (sh == 0) return static_cast<int>(q_->mant_ & 1u);
      const long long r = -sh;
      if (r >= 64) return 0;
      return static_cast<int>((q_->mant_ >> r) & 1u);
    }
    case Kind::Rational: {
      if (q_->one_) return 1;
      rem_ <<= 1;
      if (rem_ >= q_->den_) {
        rem_ -= q_->den_;
        return 1;
      }
      return 0;
    }
    case Kind::Digits: {
      int d = 0;
      try {
        d = (*q_->digits_)(pos_);
      } catch (const std::exception& e) {
        throw SamplerError(std::string("digit producer failed: ") + e.what());
      }
      if (d != 0 && d != 1) throw SamplerError("digit producer returned a non-binary digit");
      return d;
    }
  }
  return 0;
}

bool KnownProbability::Cursor::rest_zero() const {
  switch (q_->kind_) {
    case Kind::Dyadic: {
      if (q_->one_) return false;
      if (q_->mant_ == 0) return true;
      const long long sh = static_cast<long long>(q_->exp2_) + static_cast<long long>(pos_);
      if (sh >= 0) return true;
      const long long r = -sh;
      if (r >= 64) return false;
      return (q_->mant_ & ((std::uint64_t{1} << r) - 1)) == 0;
    }
    case Kind::Rational: return !q_->one_ && rem_ == 0;
    case Kind::Digits: return false;
  }
  return false;
}

bool LazyUniform::bit(std::size_t i) {
  while (bits_.size() < i) bits_.push_back(ctx_->fair_bit());
  return bits_[i - 1];
}

bool LazyUniform::less_than(const KnownProbability& q) {
  if (q.is_one()) return true;
  KnownProbability::Cursor cur(q);
  for (std::size_t i = 1;; ++i) {
    const int d = cur.next();
    const int b = bit(i) ? 1 : 0;
    if (b < d) return true;
    if (b > d) return false;
    if (cur.rest_zero()) return false;
  }
}

bool bernoulli_known(const KnownProbability& q, SamplingContext& ctx) {
  if (q.is_one()) {
    ctx.fair_bit();
    return true;
  }
  LazyUniform u(ctx);
  return u.less_than(q);
}

}  // namespace qbf
