#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "kmsflow/errors.hpp"

namespace kmsflow {

using Rational = mpq_class;
using Integer = mpz_class;

// mpq_class(a, b) does not canonicalise; always build fractions through here.
inline Rational ratio(long num, long den) {
  if (den == 0) throw InvalidArgument("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Accepts "p", "-p", "+p", "p/q" with q > 0. Decimals are rejected on purpose.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&](const char* why) {
    throw ParseError("invalid rational '" + std::string(text) + "': " + why);
  };
  std::size_t i = 0;
  std::string num;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    if (text[i] == '-') num.push_back('-');
    ++i;
  }
  std::size_t digits_start = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) num.push_back(text[i++]);
  if (i == digits_start) fail("missing numerator");
  std::string den = "1";
  if (i < text.size() && text[i] == '/') {
    ++i;
    std::size_t ds = i;
    den.clear();
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) den.push_back(text[i++]);
    if (i == ds) fail("missing denominator");
  }
  if (i != text.size()) fail("unexpected character");
  Integer d(den, 10);
  if (d == 0) fail("zero denominator");
  Rational q(Integer(num, 10), d);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Rational pow(const Rational& base, long exponent) {
  Rational b = base;
  if (exponent < 0) {
    if (b == 0) throw InvalidArgument("zero to a negative power");
    b = 1 / b;
    exponent = -exponent;
  }
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), b.get_num_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(r.get_den_mpz_t(), b.get_den_mpz_t(), static_cast<unsigned long>(exponent));
  return r;
}

inline Integer floor(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Integer ceil(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

// The rational with smallest denominator in [lo, hi] (ties broken towards zero).
inline Rational simplest_between(Rational lo, Rational hi) {
  if (lo > hi) std::swap(lo, hi);
  if (lo <= 0 && hi >= 0) return 0;
  if (hi < 0) return -simplest_between(-hi, -lo);
  Integer c = ceil(lo);
  if (c <= hi) return Rational(c);
  Integer n = floor(lo);
  Rational a = lo - n;
  Rational b = hi - n;
  return Rational(n) + 1 / simplest_between(1 / b, 1 / a);
}

// Exact value of a finite double.
inline Rational from_double(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("non-finite value");
  return Rational(x);
}

}  // namespace kmsflow
