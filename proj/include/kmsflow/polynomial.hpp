#pragma once

#include <utility>
#include <vector>

#include "kmsflow/errors.hpp"
#include "kmsflow/rational.hpp"

namespace kmsflow {

// Dense univariate polynomial over Q, coefficients from low to high degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> c) : c_(std::move(c)) { trim(); }
  static Polynomial constant(const Rational& c) { return Polynomial({c}); }
  static Polynomial x() { return Polynomial({0, 1}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coefficients() const { return c_; }
  Rational operator[](int k) const { return k >= 0 && k <= degree() ? c_[k] : Rational(0); }
  const Rational& lead() const { return c_.back(); }

  Rational operator()(const Rational& x) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      acc *= x;
      acc += *it;
    }
    return acc;
  }
  int sign_at(const Rational& x) const { return sgn((*this)(x)); }

  Polynomial derivative() const {
    std::vector<Rational> d;
    for (int k = 1; k <= degree(); ++k) d.push_back(c_[k] * k);
    return Polynomial(std::move(d));
  }

  // Coefficients of P(x + c).
  Polynomial taylor_shift(const Rational& c) const {
    std::vector<Rational> a = c_;
    int n = degree();
    if (c == 0 || n < 1) return *this;
    for (int i = 0; i < n; ++i)
      for (int k = n - 1; k >= i; --k) a[k] += c * a[k + 1];
    return Polynomial(std::move(a));
  }

  // Coefficients of P(s * x).
  Polynomial scaled(const Rational& s) const {
    std::vector<Rational> a = c_;
    Rational p = 1;
    for (auto& q : a) {
      q *= p;
      p *= s;
    }
    return Polynomial(std::move(a));
  }

  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      c_.clear();
      return *this;
    }
    for (auto& q : c_) q *= s;
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }
  bool operator==(const Polynomial& o) const { return c_ == o.c_; }

  static int sgn(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

inline std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw InvalidArgument("polynomial division by zero");
  std::vector<Rational> r = a.coefficients();
  int db = b.degree();
  if (a.degree() < db) return {Polynomial(), a};
  std::vector<Rational> q(a.degree() - db + 1);
  for (int k = a.degree(); k >= db; --k) {
    if (r[k] == 0) continue;
    Rational f = r[k] / b.lead();
    q[k - db] = f;
    for (int j = 0; j <= db; ++j) r[k - db + j] -= f * b[j];
  }
  r.resize(db);
  return {Polynomial(std::move(q)), Polynomial(std::move(r))};
}

inline Polynomial monic(const Polynomial& p) { return p.is_zero() ? p : p * (1 / p.lead()); }

inline Polynomial gcd(Polynomial a, Polynomial b) {
  while (!b.is_zero()) {
    Polynomial r = divmod(a, b).second;
    a = std::move(b);
    b = monic(r);
  }
  return monic(a);
}

// P / gcd(P, P'): same roots, all simple.
inline Polynomial squarefree_part(const Polynomial& p) {
  if (p.degree() < 1) return p;
  return divmod(p, gcd(p, p.derivative())).first;
}

// Sturm chain; counts distinct real roots in half-open intervals (a, b].
class SturmSequence {
 public:
  explicit SturmSequence(const Polynomial& p) {
    if (p.is_zero()) throw InvalidArgument("Sturm sequence of the zero polynomial");
    chain_.push_back(normalise(p));
    if (p.degree() < 1) return;
    chain_.push_back(normalise(p.derivative()));
    while (true) {
      Polynomial r = divmod(chain_[chain_.size() - 2], chain_.back()).second;
      if (r.is_zero()) break;
      chain_.push_back(normalise(r * Rational(-1)));
    }
  }
  int variations(const Rational& x) const {
    int count = 0, last = 0;
    for (const auto& p : chain_) {
      int s = p.sign_at(x);
      if (s == 0) continue;
      if (last != 0 && s != last) ++count;
      last = s;
    }
    return count;
  }
  int count_roots(const Rational& a, const Rational& b) const { return variations(a) - variations(b); }
  // Sign pattern at +infinity.
  int variations_at_infinity() const {
    int count = 0, last = 0;
    for (const auto& p : chain_) {
      int s = Polynomial::sgn(p.lead());
      if (last != 0 && s != last) ++count;
      last = s;
    }
    return count;
  }
  const std::vector<Polynomial>& chain() const { return chain_; }

 private:
  // Positive rescaling keeps signs and stops coefficient blow-up.
  static Polynomial normalise(const Polynomial& p) { return p * (1 / abs(p.lead())); }
  std::vector<Polynomial> chain_;
};

struct Range {
  Rational lo;
  Rational hi;
};

// Enclosure of P over [l, r] by expanding around the midpoint. Odd powers of the
// offset range symmetrically, even powers only upwards from zero.
inline Range range_on(const Polynomial& p, const Rational& l, const Rational& r) {
  if (p.is_zero()) return {0, 0};
  Rational c = (l + r) / 2;
  Rational w = (r - l) / 2;
  Polynomial s = p.taylor_shift(c);
  Range out{s[0], s[0]};
  Rational wp = 1;
  for (int j = 1; j <= s.degree(); ++j) {
    wp *= w;
    if (s[j] == 0) continue;
    Rational term = s[j] * wp;
    if (j % 2 == 1) {
      Rational a = abs(term);
      out.lo -= a;
      out.hi += a;
    } else if (term > 0) {
      out.hi += term;
    } else {
      out.lo += term;
    }
  }
  return out;
}

// Upper bound for the absolute value of every real root.
inline Rational cauchy_bound(const Polynomial& p) {
  Rational m = 0;
  for (int k = 0; k < p.degree(); ++k) m = std::max(m, abs(p[k]));
  return 1 + m / abs(p.lead());
}

}  // namespace kmsflow
