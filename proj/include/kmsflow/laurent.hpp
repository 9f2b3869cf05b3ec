#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "kmsflow/errors.hpp"
#include "kmsflow/polynomial.hpp"
#include "kmsflow/rational.hpp"

namespace kmsflow {

// Sparse Laurent polynomial over Q. Zero coefficients are never stored.
class LaurentPoly {
 public:
  LaurentPoly() = default;
  explicit LaurentPoly(std::map<int, Rational> terms) : t_(std::move(terms)) { prune(); }
  static LaurentPoly monomial(int exponent, const Rational& c) {
    LaurentPoly p;
    if (c != 0) p.t_[exponent] = c;
    return p;
  }
  static LaurentPoly constant(const Rational& c) { return monomial(0, c); }
  static LaurentPoly from_polynomial(const Polynomial& p, int shift) {
    LaurentPoly r;
    for (int k = 0; k <= p.degree(); ++k)
      if (p[k] != 0) r.t_[k + shift] = p[k];
    return r;
  }

  bool is_zero() const { return t_.empty(); }
  const std::map<int, Rational>& terms() const { return t_; }
  std::size_t size() const { return t_.size(); }
  Rational coeff(int k) const {
    auto it = t_.find(k);
    return it == t_.end() ? Rational(0) : it->second;
  }
  int min_exponent() const { return nonzero().t_.begin()->first; }
  int max_exponent() const { return nonzero().t_.rbegin()->first; }
  const Rational& leading() const { return nonzero().t_.rbegin()->second; }

  Rational operator()(const Rational& t) const {
    if (is_zero()) return 0;
    if (t == 0 && min_exponent() < 0) throw InvalidArgument("Laurent polynomial evaluated at 0");
    auto [p, e] = cleared();
    return p(t) * pow(t, e);
  }

  // p(t) = t^e * P(t) with P(0) != 0.
  std::pair<Polynomial, int> cleared() const {
    if (is_zero()) return {Polynomial(), 0};
    int e = min_exponent();
    std::vector<Rational> c(max_exponent() - e + 1);
    for (const auto& [k, v] : t_) c[k - e] = v;
    return {Polynomial(std::move(c)), e};
  }

  // Multiplication by t^k.
  LaurentPoly shifted(int k) const {
    LaurentPoly r;
    for (const auto& [e, v] : t_) r.t_[e + k] = v;
    return r;
  }
  // p(1/t).
  LaurentPoly reflected() const {
    LaurentPoly r;
    for (const auto& [e, v] : t_) r.t_[-e] = v;
    return r;
  }
  Rational coefficient_sum() const {
    Rational s = 0;
    for (const auto& [e, v] : t_) s += v;
    return s;
  }

  LaurentPoly& operator+=(const LaurentPoly& o) {
    for (const auto& [e, v] : o.t_) add(e, v);
    return *this;
  }
  LaurentPoly& operator-=(const LaurentPoly& o) {
    for (const auto& [e, v] : o.t_) add(e, -v);
    return *this;
  }
  LaurentPoly& operator*=(const Rational& c) {
    if (c == 0) {
      t_.clear();
      return *this;
    }
    for (auto& kv : t_) kv.second *= c;
    return *this;
  }
  friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
  friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
  friend LaurentPoly operator*(LaurentPoly a, const Rational& c) { return a *= c; }
  friend LaurentPoly operator*(const Rational& c, LaurentPoly a) { return a *= c; }
  LaurentPoly operator-() const { return *this * Rational(-1); }
  friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
    LaurentPoly r;
    for (const auto& [ea, va] : a.t_)
      for (const auto& [eb, vb] : b.t_) r.add(ea + eb, va * vb);
    return r;
  }
  bool operator==(const LaurentPoly& o) const { return t_ == o.t_; }

 private:
  const LaurentPoly& nonzero() const {
    if (t_.empty()) throw InvalidArgument("degree of the zero Laurent polynomial");
    return *this;
  }
  void add(int e, const Rational& v) {
    auto [it, inserted] = t_.try_emplace(e, v);
    if (!inserted) it->second += v;
    if (it->second == 0) t_.erase(it);
  }
  void prune() {
    for (auto it = t_.begin(); it != t_.end();) it = it->second == 0 ? t_.erase(it) : std::next(it);
  }
  std::map<int, Rational> t_;
};

struct Interval {
  Rational lo;
  Rational hi;
  bool operator==(const Interval&) const = default;
};

// Closed piece of a subset of (0, inf): a point (lo == hi), an interval, or a ray (no hi).
struct Component {
  Rational lo;
  std::optional<Rational> hi;
  bool is_ray() const { return !hi.has_value(); }
  bool is_point() const { return hi && *hi == lo; }
  bool contains(const Rational& t) const { return t >= lo && (!hi || t <= *hi); }
};

// Closed subset of (0, inf) containing 1: finitely many intervals and points, plus an optional ray.
class AdmissibleSet {
 public:
  AdmissibleSet(std::vector<Interval> intervals, std::vector<Rational> points = {},
                std::optional<Rational> ray_from = std::nullopt) {
    std::vector<Component> raw;
    for (const auto& iv : intervals) {
      if (iv.lo > iv.hi) throw InvalidArgument("interval with lo > hi");
      raw.push_back({iv.lo, iv.hi});
    }
    for (const auto& p : points) raw.push_back({p, p});
    if (ray_from) raw.push_back({*ray_from, std::nullopt});
    if (raw.empty()) throw InvalidArgument("empty admissible set");
    for (const auto& c : raw)
      if (c.lo <= 0) throw InvalidArgument("admissible set must lie in (0, inf)");
    comps_ = merge(std::move(raw));
    if (!contains(1)) throw InvalidArgument("admissible set must contain 1");
  }
  static AdmissibleSet interval(const Rational& lo, const Rational& hi) { return AdmissibleSet({{lo, hi}}); }

  const std::vector<Component>& components() const { return comps_; }
  std::vector<Interval> intervals() const {
    std::vector<Interval> out;
    for (const auto& c : comps_)
      if (c.hi && *c.hi != c.lo) out.push_back({c.lo, *c.hi});
    return out;
  }
  std::vector<Rational> points() const {
    std::vector<Rational> out;
    for (const auto& c : comps_)
      if (c.is_point()) out.push_back(c.lo);
    return out;
  }
  std::optional<Rational> ray_from() const {
    if (!comps_.empty() && comps_.back().is_ray()) return comps_.back().lo;
    return std::nullopt;
  }
  bool is_compact() const { return !ray_from().has_value(); }
  bool contains(const Rational& t) const {
    return std::any_of(comps_.begin(), comps_.end(), [&](const Component& c) { return c.contains(t); });
  }
  const Rational& min() const { return comps_.front().lo; }
  // Largest point of the bounded components (ray excluded).
  std::optional<Rational> max_bounded() const {
    for (auto it = comps_.rbegin(); it != comps_.rend(); ++it)
      if (it->hi) return *it->hi;
    return std::nullopt;
  }
  // Components of the set intersected with (0, r].
  std::vector<Component> truncated(const Rational& r) const {
    std::vector<Component> out;
    for (const auto& c : comps_) {
      if (c.lo > r) break;
      Rational hi = c.hi ? std::min(*c.hi, r) : r;
      out.push_back({c.lo, hi});
    }
    return out;
  }
  // Components of the set intersected with [r, inf).
  std::vector<Component> tail_from(const Rational& r) const {
    std::vector<Component> out;
    for (const auto& c : comps_) {
      if (c.hi && *c.hi < r) continue;
      out.push_back({std::max(c.lo, r), c.hi});
    }
    return out;
  }
  std::vector<Component> bounded_components() const {
    std::vector<Component> out;
    for (const auto& c : comps_)
      if (c.hi) out.push_back(c);
    return out;
  }

  bool operator==(const AdmissibleSet& o) const {
    if (comps_.size() != o.comps_.size()) return false;
    for (std::size_t i = 0; i < comps_.size(); ++i)
      if (comps_[i].lo != o.comps_[i].lo || comps_[i].hi != o.comps_[i].hi) return false;
    return true;
  }

 private:
  static std::vector<Component> merge(std::vector<Component> raw) {
    std::sort(raw.begin(), raw.end(), [](const Component& a, const Component& b) { return a.lo < b.lo; });
    std::vector<Component> out;
    for (auto& c : raw) {
      if (!out.empty()) {
        auto& last = out.back();
        if (last.is_ray() || c.lo <= *last.hi) {
          if (last.hi && (c.is_ray() || *c.hi > *last.hi)) last.hi = c.hi;
          continue;
        }
      }
      out.push_back(c);
    }
    return out;
  }
  std::vector<Component> comps_;
};

}  // namespace kmsflow
