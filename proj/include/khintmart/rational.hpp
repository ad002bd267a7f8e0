#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "khintmart/errors.hpp"

namespace khintmart {

/// Exact rational scalar. Always canonical: lowest terms, denominator > 0.
///
/// Thin wrapper over GMP's mpq_class that enforces canonicalization at every
/// construction point (mpq_class(n, d) alone does not) and pins the string
/// format used by the file interfaces: "num/den" with den > 0.
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long n) : v_(n) {}  // NOLINT(google-explicit-constructor): scalar type
  Rational(long n, long d) : v_(n, d) { canonicalize_checked(); }
  explicit Rational(const mpq_class& q) : v_(q) { canonicalize_checked(); }
  explicit Rational(mpq_class&& q) : v_(std::move(q)) { canonicalize_checked(); }
  explicit Rational(const mpz_class& n) : v_(n) {}
  Rational(const mpz_class& n, const mpz_class& d) : v_(n, d) { canonicalize_checked(); }

  /// Exact conversion: every finite double is a dyadic rational.
  static Rational from_double(double x) {
    mpq_class q;
    mpq_set_d(q.get_mpq_t(), x);
    return Rational(std::move(q));
  }

  /// Parses "num/den" or a plain integer "num". Throws ParseError on
  /// malformed input or zero denominator.
  static Rational from_string(std::string_view s) {
    const auto slash = s.find('/');
    try {
      if (slash == std::string_view::npos) {
        mpz_class n(std::string(s), 10);
        return Rational(mpq_class(n));
      }
      mpz_class n(std::string(s.substr(0, slash)), 10);
      mpz_class d(std::string(s.substr(slash + 1)), 10);
      if (d == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(s) + "'");
      return Rational(n, d);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::ParseError, "malformed rational '" + std::string(s) + "'");
    }
  }

  /// Canonical "num/den" form, denominator always written ("0/1", "-2/1").
  std::string to_string() const {
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
  }

  double to_double() const { return v_.get_d(); }

  const mpz_class& num() const { return v_.get_num(); }
  const mpz_class& den() const { return v_.get_den(); }
  const mpq_class& raw() const { return v_; }

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sgn(v_) == 0; }

  Rational abs() const { return Rational(mpq_class(::abs(v_))); }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ + b.v_)); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ - b.v_)); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ * b.v_)); }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw Error(ErrorCode::DomainError, "rational division by zero");
    return Rational(mpq_class(a.v_ / b.v_));
  }
  Rational operator-() const { return Rational(mpq_class(-v_)); }

  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) { return mpq_equal(a.v_.get_mpq_t(), b.v_.get_mpq_t()) != 0; }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) < 0; }
  friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) <= 0; }
  friend bool operator>(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) > 0; }
  friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) >= 0; }

 private:
  void canonicalize_checked() {
    if (v_.get_den() == 0) throw Error(ErrorCode::ParseError, "zero denominator");
    v_.canonicalize();
  }

  mpq_class v_;
};

inline Rational abs(const Rational& r) { return r.abs(); }

inline Rational square(const Rational& r) { return r * r; }

/// Floor-based rational approximation of sqrt(x) for x >= 0 with relative
/// error at most 2^-bits. Exact when possible is not guaranteed; callers
/// that need the exact target keep x itself (the square) alongside.
inline Rational rational_sqrt(const Rational& x, unsigned bits = 60) {
  if (x.sign() < 0) throw Error(ErrorCode::DomainError, "rational_sqrt of negative value");
  if (x.is_zero()) return Rational(0);
  // sqrt(p/q) = sqrt(p*q)/q; scale so the integer sqrt carries >= bits+1 bits.
  mpz_class n = x.num() * x.den();
  const std::size_t len = mpz_sizeinbase(n.get_mpz_t(), 2);
  std::size_t shift = 0;
  if (len < 2 * (bits + 2)) shift = 2 * (bits + 2) - len;
  shift += shift & 1;  // keep the scaling a perfect square
  mpz_class scaled = n << shift;
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  mpz_class denom = x.den() << (shift / 2);
  return Rational(root, denom);
}

}  // namespace khintmart
