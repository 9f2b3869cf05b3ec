#pragma once

#include <optional>
#include <queue>
#include <vector>

#include "kmsflow/laurent.hpp"
#include "kmsflow/polynomial.hpp"

namespace kmsflow {

// A point of the set where p is not strictly positive. When the zero is
// irrational (a double root at an algebraic point), `bracket` holds an interval
// in which p provably vanishes; point is then the simplest rational in it and
// value is p there, which may be positive.
struct PositivityWitness {
  Rational point;
  Rational value;
  std::optional<Interval> bracket;
};

struct PositivityResult {
  bool positive = false;
  std::optional<PositivityWitness> witness;
  explicit operator bool() const { return positive; }
};

namespace detail {

// Range of t^e * P(t) over [l, r], 0 < l.
inline Range laurent_range(const Polynomial& p, int e, const Rational& l, const Rational& r) {
  Range pr = range_on(p, l, r);
  if (e == 0) return pr;
  Rational a = pow(l, e), b = pow(r, e);
  if (a > b) std::swap(a, b);
  Range out;
  out.lo = pr.lo >= 0 ? pr.lo * a : pr.lo * b;
  out.hi = pr.hi >= 0 ? pr.hi * b : pr.hi * a;
  return out;
}

enum class RefineGoal { Positive, Margin };

struct RefineOutcome {
  Rational bound;            // certified lower bound over the interval
  bool decided = false;      // goal met (or witness found) within budget
  std::optional<Rational> nonpositive_at;
  Rational best_value;
};

// Branch and bound over [l, r] for a function with enclosure `range` and exact
// evaluation `eval`. Positive: stop once every piece has a positive lower bound
// or a sampled value is <= 0. Margin: stop once the bound is at least half the
// smallest sampled value.
template <class RangeFn, class EvalFn>
RefineOutcome refine_lower(RangeFn&& range, EvalFn&& eval, const Rational& l, const Rational& r, RefineGoal goal,
                           std::size_t budget) {
  struct Piece {
    Rational lo_bound, l, r;
  };
  auto cmp = [](const Piece& a, const Piece& b) { return a.lo_bound > b.lo_bound; };
  std::priority_queue<Piece, std::vector<Piece>, decltype(cmp)> heap(cmp);
  RefineOutcome out;
  Rational vl = eval(l), vr = eval(r);
  Rational best_at = vl <= vr ? l : r;
  out.best_value = vl <= vr ? vl : vr;
  heap.push({range(l, r).lo, l, r});
  std::size_t splits = 0;
  while (true) {
    const Piece top = heap.top();
    out.bound = top.lo_bound;
    if (out.best_value <= 0) {
      out.nonpositive_at = best_at;
      out.decided = true;
      out.bound = std::min(out.bound, out.best_value);
      return out;
    }
    if (goal == RefineGoal::Positive && top.lo_bound > 0) {
      out.decided = true;
      return out;
    }
    if (goal == RefineGoal::Margin && top.lo_bound > 0 && 2 * top.lo_bound >= out.best_value) {
      out.decided = true;
      return out;
    }
    if (splits >= budget || top.l == top.r) return out;
    heap.pop();
    ++splits;
    Rational m = (top.l + top.r) / 2;
    Rational vm = eval(m);
    if (vm < out.best_value) {
      out.best_value = vm;
      best_at = m;
    }
    heap.push({range(top.l, m).lo, top.l, m});
    heap.push({range(m, top.r).lo, m, top.r});
  }
}

// Same for polynomials in a plain variable (no positivity constraint on l).
inline RefineOutcome refine_poly(const Polynomial& p, const Rational& l, const Rational& r, RefineGoal goal,
                                 std::size_t budget) {
  return refine_lower([&](const Rational& a, const Rational& b) { return range_on(p, a, b); },
                      [&](const Rational& x) { return p(x); }, l, r, goal, budget);
}

inline RefineOutcome refine_laurent(const LaurentPoly& q, const Rational& l, const Rational& r, RefineGoal goal,
                                    std::size_t budget) {
  auto [p, e] = q.cleared();
  return refine_lower([&, e = e](const Rational& a, const Rational& b) { return laurent_range(p, e, a, b); },
                      [&](const Rational& x) { return q(x); }, l, r, goal, budget);
}

inline Integer denominator_lcm(const Polynomial& p) {
  Integer l = 1;
  for (const auto& c : p.coefficients()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  return l;
}

// Decides P > 0 on [a, b] (a <= b) exactly. P must be nonzero.
inline std::optional<PositivityWitness> poly_witness_on(const Polynomial& p, const Rational& a, const Rational& b,
                                                        std::size_t fast_budget = 1024) {
  Rational va = p(a);
  if (va <= 0) return PositivityWitness{a, va, std::nullopt};
  if (a == b) return std::nullopt;
  Rational vb = p(b);
  if (vb <= 0) return PositivityWitness{b, vb, std::nullopt};
  if (p.degree() <= 0) return std::nullopt;

  RefineOutcome fast = refine_poly(p, a, b, RefineGoal::Positive, fast_budget);
  if (fast.decided) {
    if (!fast.nonpositive_at) return std::nullopt;
    return PositivityWitness{*fast.nonpositive_at, p(*fast.nonpositive_at), std::nullopt};
  }

  Polynomial q = squarefree_part(p);
  SturmSequence sq(q);
  if (sq.count_roots(a, b) == 0) return std::nullopt;

  // Isolate the distinct roots of P inside (a, b).
  std::vector<Interval> work{{a, b}}, isolated;
  while (!work.empty()) {
    Interval iv = work.back();
    work.pop_back();
    int n = sq.count_roots(iv.lo, iv.hi);
    if (n == 0) continue;
    if (n == 1) {
      isolated.push_back(iv);
      continue;
    }
    Rational m = (iv.lo + iv.hi) / 2;
    Rational vm = p(m);
    if (vm <= 0) return PositivityWitness{m, vm, std::nullopt};
    work.push_back({m, iv.hi});
    work.push_back({iv.lo, m});
  }
  Rational scaled_lead = q.lead() * denominator_lcm(q);
  Integer lead = abs(scaled_lead).get_num();
  Rational resolution = 1 / (Rational(lead) * lead);
  for (auto iv : isolated) {
    // Each interval is (lo, hi] with exactly one root of Q.
    Rational vl = p(iv.lo), vh = p(iv.hi);
    if (vl <= 0) return PositivityWitness{iv.lo, vl, std::nullopt};
    if (vh <= 0) return PositivityWitness{iv.hi, vh, std::nullopt};
    // Even multiplicity: P touches zero. Shrink until the root is pinned down.
    int sign_lo = q.sign_at(iv.lo);
    while (true) {
      Rational s = simplest_between(iv.lo, iv.hi);
      if (s != iv.lo && s != iv.hi && q(s) == 0) return PositivityWitness{s, p(s), std::nullopt};
      if (iv.hi - iv.lo < resolution) {
        Rational pt = s;
        return PositivityWitness{pt, p(pt), iv};
      }
      Rational m = (iv.lo + iv.hi) / 2;
      int sm = q.sign_at(m);
      if (sm == 0) return PositivityWitness{m, p(m), std::nullopt};
      if (sm == sign_lo)
        iv.lo = m;
      else
        iv.hi = m;
    }
  }
  return std::nullopt;
}

// Positivity of t^e P(t) on [R, inf) for nonzero P.
inline std::optional<PositivityWitness> laurent_ray_witness(const LaurentPoly& q, const Rational& from) {
  auto [p, e] = q.cleared();
  Rational v = q(from);
  if (v <= 0) return PositivityWitness{from, v, std::nullopt};
  // Fast path: substitute u = 1/t, t^{-deg} q(t) becomes a polynomial on [0, 1/R].
  Polynomial inv(std::vector<Rational>(p.coefficients().rbegin(), p.coefficients().rend()));
  if (p.lead() > 0) {
    RefineOutcome fast = refine_poly(inv, 0, 1 / from, RefineGoal::Positive, 1024);
    if (fast.decided && !fast.nonpositive_at) return std::nullopt;
  }
  Rational bound = cauchy_bound(p);
  if (p.lead() < 0) {
    Rational t0 = std::max(bound, from) + 1;
    return PositivityWitness{t0, q(t0), std::nullopt};
  }
  if (bound <= from) return std::nullopt;
  auto w = poly_witness_on(p, from, bound);
  if (w) w->value = q(w->point);
  return w;
}

inline std::optional<PositivityWitness> component_witness(const LaurentPoly& q, const Component& c) {
  if (q.is_zero()) return PositivityWitness{c.lo, 0, std::nullopt};
  if (c.is_ray()) return laurent_ray_witness(q, c.lo);
  auto [p, e] = q.cleared();
  auto w = poly_witness_on(p, c.lo, *c.hi);
  if (w) w->value = q(w->point);
  return w;
}

inline PositivityResult positive_on(const LaurentPoly& q, const std::vector<Component>& comps) {
  for (const auto& c : comps)
    if (auto w = component_witness(q, c)) return {false, w};
  return {true, std::nullopt};
}

// Certified lower bound on a bounded component. Runs until the goal is met.
inline RefineOutcome component_lower_bound(const LaurentPoly& q, const Component& c, RefineGoal goal,
                                           std::size_t budget = 1u << 20) {
  if (q.is_zero()) return {0, true, c.lo, 0};
  if (c.is_point()) {
    Rational v = q(c.lo);
    RefineOutcome o{v, true, std::nullopt, v};
    if (v <= 0) o.nonpositive_at = c.lo;
    return o;
  }
  if (c.is_ray()) {
    // t^{-deg} q on [R, inf) as a polynomial in u = 1/t on [0, 1/R]; the bound
    // is for the scaled function, which has the same sign.
    auto [p, e] = q.cleared();
    Polynomial inv(std::vector<Rational>(p.coefficients().rbegin(), p.coefficients().rend()));
    return refine_poly(inv, 0, 1 / c.lo, goal, budget);
  }
  return refine_laurent(q, c.lo, *c.hi, goal, budget);
}

}  // namespace detail

inline PositivityResult sturm_positive_on(const LaurentPoly& p, const AdmissibleSet& s) {
  return detail::positive_on(p, s.components());
}

inline PositivityResult sturm_positive_on(const LaurentPoly& p, const Interval& iv) {
  if (iv.lo <= 0 || iv.lo > iv.hi) throw InvalidArgument("interval must satisfy 0 < lo <= hi");
  return detail::positive_on(p, {Component{iv.lo, iv.hi}});
}

struct MinCertificate {
  Rational bound;  // p >= bound on the set
  std::optional<PositivityWitness> witness;
  bool positive() const { return bound > 0; }
};

namespace detail {

inline MinCertificate min_on_components(const LaurentPoly& p, const std::vector<Component>& comps) {
  if (comps.empty()) throw InvalidArgument("empty set");
  PositivityResult pos = positive_on(p, comps);
  MinCertificate out;
  bool first = true;
  for (const auto& c : comps) {
    if (c.is_ray()) throw InvalidArgument("certified_min needs a compact set");
    RefineOutcome o = pos.positive ? component_lower_bound(p, c, RefineGoal::Margin)
                                   : component_lower_bound(p, c, RefineGoal::Positive, 64);
    if (pos.positive && !o.decided) throw InternalError("lower bound refinement did not converge");
    if (first || o.bound < out.bound) out.bound = o.bound;
    first = false;
  }
  if (!pos.positive) {
    out.witness = pos.witness;
    if (out.bound > 0) out.bound = 0;
    if (pos.witness && !pos.witness->bracket && pos.witness->value < out.bound) out.bound = pos.witness->value;
  }
  return out;
}

}  // namespace detail

inline MinCertificate certified_min(const LaurentPoly& p, const AdmissibleSet& s) {
  if (!s.is_compact()) throw InvalidArgument("certified_min needs a compact set");
  return detail::min_on_components(p, s.components());
}

}  // namespace kmsflow
