#pragma once

#include <map>
#include <optional>
#include <vector>

#include "kmsflow/affine.hpp"
#include "kmsflow/laurent.hpp"
#include "kmsflow/positivity.hpp"

namespace kmsflow {

enum class Mode { Compact, Unbounded };

class Scenario {
 public:
  Scenario(Simplex simplex, Face face, AdmissibleSet l, Mode mode)
      : simplex_(simplex), face_(std::move(face)), l_(std::move(l)), mode_(mode) {
    if (face_.vertex_count() != simplex_.vertex_count()) throw DimensionMismatch("face belongs to another simplex");
    if ((mode_ == Mode::Unbounded) != l_.ray_from().has_value())
      throw InvalidArgument("unbounded mode requires a ray and compact mode forbids one");
  }
  const Simplex& simplex() const { return simplex_; }
  const Face& face() const { return face_; }
  const AdmissibleSet& L() const { return l_; }
  Mode mode() const { return mode_; }
  int vertex_count() const { return simplex_.vertex_count(); }

 private:
  Simplex simplex_;
  Face face_;
  AdmissibleSet l_;
  Mode mode_;
};

// Finitely supported map exponent -> affine element; a Laurent polynomial with
// affine coefficients.
class GroupElement {
 public:
  explicit GroupElement(int vertex_count = 1) : n_(vertex_count) {}
  GroupElement(int vertex_count, const std::map<int, AffineElement>& terms) : n_(vertex_count) {
    for (const auto& [m, a] : terms) add(m, a);
  }
  static GroupElement unit(int n) { return at(0, AffineElement::constant(n, 1)); }
  static GroupElement at(int exponent, const AffineElement& h) {
    GroupElement g(h.size());
    g.add(exponent, h);
    return g;
  }
  // The same Laurent polynomial at every vertex.
  static GroupElement from_laurent(int n, const LaurentPoly& p) {
    GroupElement g(n);
    for (const auto& [k, c] : p.terms()) g.add(k, AffineElement::constant(n, c));
    return g;
  }
  static GroupElement from_vertex_polys(const std::vector<LaurentPoly>& polys) {
    int n = static_cast<int>(polys.size());
    GroupElement g(n);
    for (int v = 0; v < n; ++v)
      for (const auto& [k, c] : polys[v].terms()) {
        AffineElement a = AffineElement::zero(n);
        a[v] = c;
        g.add(k, a);
      }
    return g;
  }

  int vertex_count() const { return n_; }
  bool is_zero() const { return c_.empty(); }
  const std::map<int, AffineElement>& terms() const { return c_; }
  AffineElement coeff(int m) const {
    auto it = c_.find(m);
    return it == c_.end() ? AffineElement::zero(n_) : it->second;
  }
  LaurentPoly vertex_poly(int v) const {
    std::map<int, Rational> t;
    for (const auto& [m, a] : c_)
      if (a[v] != 0) t[m] = a[v];
    return LaurentPoly(std::move(t));
  }
  AffineElement coefficient_sum() const {
    AffineElement s = AffineElement::zero(n_);
    for (const auto& [m, a] : c_) s += a;
    return s;
  }

  GroupElement& operator+=(const GroupElement& o) {
    check(o);
    for (const auto& [m, a] : o.c_) add(m, a);
    return *this;
  }
  GroupElement& operator-=(const GroupElement& o) {
    check(o);
    for (const auto& [m, a] : o.c_) add(m, -a);
    return *this;
  }
  GroupElement& operator*=(const Rational& s) {
    if (s == 0) c_.clear();
    for (auto& kv : c_) kv.second *= s;
    return *this;
  }
  friend GroupElement operator+(GroupElement a, const GroupElement& b) { return a += b; }
  friend GroupElement operator-(GroupElement a, const GroupElement& b) { return a -= b; }
  friend GroupElement operator*(GroupElement a, const Rational& s) { return a *= s; }
  friend GroupElement operator*(const Rational& s, GroupElement a) { return a *= s; }
  GroupElement operator-() const { return *this * Rational(-1); }
  bool operator==(const GroupElement& o) const { return n_ == o.n_ && c_ == o.c_; }

  // Product with a scalar Laurent polynomial, vertex by vertex.
  friend GroupElement operator*(const LaurentPoly& p, const GroupElement& g) {
    GroupElement r(g.n_);
    for (const auto& [k, c] : p.terms())
      for (const auto& [m, a] : g.c_) r.add(k + m, a * c);
    return r;
  }

 private:
  void check(const GroupElement& o) const {
    if (o.n_ != n_) throw DimensionMismatch("group elements over different simplices");
  }
  void add(int m, const AffineElement& a) {
    if (a.size() != n_) throw DimensionMismatch("coefficient has the wrong dimension");
    auto [it, inserted] = c_.try_emplace(m, a);
    if (!inserted) it->second += a;
    if (it->second.is_zero()) c_.erase(it);
  }
  int n_;
  std::map<int, AffineElement> c_;
};

inline Rational sigma_eval(const GroupElement& g, int v, const Rational& t) {
  if (t <= 0) throw InvalidArgument("sigma_eval needs t > 0");
  if (v < 0 || v >= g.vertex_count()) throw InvalidArgument("vertex out of range");
  return g.vertex_poly(v)(t);
}

struct DegreeInfo {
  std::optional<int> degree;  // empty for the zero element (degree -inf)
  std::optional<AffineElement> leading;
};

inline DegreeInfo degree_and_leading(const GroupElement& g) {
  if (g.is_zero()) return {};
  const auto& [m, a] = *g.terms().rbegin();
  return {m, a};
}

// (shift(g, k))_n = g_{n+k}.
inline GroupElement shift(const GroupElement& g, int k) {
  std::map<int, AffineElement> t;
  for (const auto& [m, a] : g.terms()) t.emplace(m - k, a);
  return GroupElement(g.vertex_count(), t);
}

enum class VerdictKind { Zero, Positive, NotPositive };
enum class Reason { SetViolation, LeadingCoeffViolation };

struct VertexCertificate {
  int vertex;
  LaurentPoly checked;  // the function shown positive (t^{-deg} scaled in unbounded mode)
  Rational bound;       // certified lower bound on the constraint set
};

struct OrderVerdict {
  VerdictKind kind = VerdictKind::Zero;
  Rational margin;
  std::vector<VertexCertificate> certificates;
  int vertex = -1;
  std::optional<PositivityWitness> witness;
  Reason reason = Reason::SetViolation;
  std::optional<int> degree;

  bool nonnegative() const { return kind != VerdictKind::NotPositive; }
  bool positive() const { return kind == VerdictKind::Positive; }
};

namespace detail {

// Lower bound of a function already known to be positive on the components.
// Rays are bounded through u = 1/t, giving a bound for t^{-deg} p.
inline Rational margin_on(const LaurentPoly& p, const std::vector<Component>& comps) {
  std::optional<Rational> best;
  for (const auto& c : comps) {
    RefineOutcome o = component_lower_bound(p, c, RefineGoal::Margin);
    if (!o.decided || o.nonpositive_at) throw InternalError("margin refinement failed on a positive function");
    if (!best || o.bound < *best) best = o.bound;
  }
  return *best;
}

inline OrderVerdict not_positive(int v, std::optional<PositivityWitness> w, Reason r, std::optional<int> deg) {
  OrderVerdict out;
  out.kind = VerdictKind::NotPositive;
  out.vertex = v;
  out.witness = std::move(w);
  out.reason = r;
  out.degree = deg;
  return out;
}

}  // namespace detail

// With want_margin false a positive verdict skips the margin and certificates
// (margin is left at zero); the decision itself is unchanged.
inline OrderVerdict order_test(const GroupElement& g, const Scenario& sc, bool want_margin = true) {
  if (g.vertex_count() != sc.vertex_count()) throw DimensionMismatch("element and scenario dimensions differ");
  OrderVerdict out;
  if (g.is_zero()) return out;
  const auto& comps = sc.L().components();
  const Face& f = sc.face();
  std::optional<int> deg;
  if (sc.mode() == Mode::Unbounded) {
    auto [d, lead] = degree_and_leading(g);
    deg = d;
    for (int w = 0; w < sc.vertex_count(); ++w)
      if ((*lead)[w] <= 0)
        return detail::not_positive(w, std::nullopt, Reason::LeadingCoeffViolation, deg);
  }
  std::vector<LaurentPoly> checked(sc.vertex_count());
  for (int v : f.vertices()) {
    LaurentPoly p = g.vertex_poly(v);
    if (deg) p = p.shifted(-*deg);
    PositivityResult r = detail::positive_on(p, comps);
    if (!r.positive) return detail::not_positive(v, r.witness, Reason::SetViolation, deg);
    checked[v] = std::move(p);
  }
  AffineElement sums = g.coefficient_sum();
  for (int w : f.complement())
    if (sums[w] <= 0) return detail::not_positive(w, PositivityWitness{1, sums[w], std::nullopt}, Reason::SetViolation, deg);

  out.kind = VerdictKind::Positive;
  out.degree = deg;
  if (!want_margin) return out;
  std::optional<Rational> margin;
  auto take = [&](const Rational& b) {
    if (!margin || b < *margin) margin = b;
  };
  for (int v : f.vertices()) {
    Rational b = detail::margin_on(checked[v], comps);
    out.certificates.push_back({v, checked[v], b});
    take(b);
  }
  for (int w : f.complement()) {
    out.certificates.push_back({w, LaurentPoly::constant(sums[w]), sums[w]});
    take(sums[w]);
  }
  if (deg) {
    AffineElement lead = g.coeff(*deg);
    for (int w = 0; w < sc.vertex_count(); ++w) take(lead[w]);
  }
  out.margin = *margin;
  return out;
}

struct LargeDenominators {
  AffineElement h;
  int l = 0;
  Integer m;
};

struct Absorption {
  int exponent = 0;
  Integer n;
};

namespace detail {

// Smallest positive integer k with accept(k); accept must be monotone.
template <class Pred>
Integer minimal_multiplier(Pred accept) {
  const Integer cap = Integer(1) << 64;
  Integer hi = 1;
  while (!accept(hi)) {
    hi *= 2;
    if (hi > cap) throw InternalError("doubling search exceeded 2^64");
  }
  Integer lo = hi / 2;  // rejected (or 0)
  while (hi - lo > 1) {
    Integer mid = (lo + hi) / 2;
    if (accept(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

// n h t^l <= g <= m h t^l with h a constant below margin / n.
inline LargeDenominators large_denominators(const GroupElement& g, int n, const Scenario& sc) {
  if (n < 1) throw InvalidArgument("n must be positive");
  OrderVerdict v = order_test(g, sc);
  if (!v.positive()) throw InvalidArgument("large_denominators needs a positive element");
  LargeDenominators out;
  out.l = *degree_and_leading(g).degree;
  Rational scale = 1;
  if (sc.mode() == Mode::Compact) {
    // sup of t^l over L
    Rational top = out.l >= 0 ? *sc.L().max_bounded() : sc.L().min();
    scale = pow(top, out.l);
  }
  Rational h = v.margin / (2 * n * scale);
  h = simplest_between(h / 2, h);
  out.h = AffineElement::constant(sc.vertex_count(), h);
  GroupElement unit = GroupElement::at(out.l, out.h);
  if (!order_test(g - unit * Rational(n), sc).nonnegative())
    throw InternalError("large_denominators lower bound failed to certify");
  out.m = detail::minimal_multiplier([&](const Integer& m) { return order_test(unit * Rational(m) - g, sc).positive(); });
  return out;
}

// h t^{i'} <= N g, with N the least multiplier leaving room for one more unit.
inline Absorption ideal_absorption(const GroupElement& g, const AffineElement& h, const Scenario& sc) {
  if (!order_test(g, sc).positive()) throw InvalidArgument("ideal_absorption needs a positive g");
  if (h.is_zero() || !affine_strictly_positive(h, Face::whole(sc.simplex())))
    throw InvalidArgument("ideal_absorption needs a positive h");
  Absorption out;
  out.exponent = *degree_and_leading(g).degree;
  GroupElement target = GroupElement::at(out.exponent, h + AffineElement::constant(sc.vertex_count(), 1));
  out.n = detail::minimal_multiplier([&](const Integer& k) { return order_test(g * Rational(k) - target, sc).nonnegative(); });
  if (!order_test(g * Rational(out.n) - GroupElement::at(out.exponent, h), sc).nonnegative())
    throw InternalError("ideal_absorption failed to certify");
  return out;
}

}  // namespace kmsflow
