#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kmsflow/dimgroup.hpp"
#include "kmsflow/laurent.hpp"
#include "kmsflow/rational.hpp"

namespace testing_support {

using kmsflow::Rational;

inline Rational Q(const char* s) { return kmsflow::parse_rational(s); }

// Laurent polynomial from (exponent, "p/q") pairs.
inline kmsflow::LaurentPoly poly(std::initializer_list<std::pair<int, const char*>> terms) {
  std::map<int, Rational> m;
  for (const auto& [k, c] : terms) m[k] += Q(c);
  return kmsflow::LaurentPoly(m);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g_); }
  // Random rational in [lo, hi] with denominator dividing `den`.
  Rational rational(const Rational& lo, const Rational& hi, int den = 64) {
    Rational span = hi - lo;
    int k = integer(0, den);
    return lo + span * kmsflow::ratio(k, den);
  }
  Rational small_rational(int bound = 10, int max_den = 4) {
    int d = integer(1, max_den);
    return kmsflow::ratio(integer(-bound * d, bound * d), d);
  }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return g_; }

 private:
  std::mt19937_64 g_;
};

// Uniform-ish random rational point of the set, ray sampled up to `ray_span` past its start.
inline Rational point_in(Rng& rng, const kmsflow::AdmissibleSet& s, const Rational& ray_span = 20) {
  const auto& comps = s.components();
  const auto& c = comps[rng.integer(0, static_cast<int>(comps.size()) - 1)];
  if (c.is_point()) return c.lo;
  Rational hi = c.hi ? *c.hi : c.lo + ray_span;
  return rng.rational(c.lo, hi, 997);
}

// Admissible set containing 1: an interval, maybe an isolated point, and a ray in
// the unbounded case.
inline kmsflow::AdmissibleSet random_set(Rng& rng, kmsflow::Mode mode) {
  Rational a = rng.rational(Q("1/4"), 1, 8), b = rng.rational(1, 3, 8);
  std::vector<Rational> pts;
  Rational top = b;
  if (rng.coin()) {
    top = b + rng.rational(Q("1/2"), 2, 4);
    pts.push_back(top);
  }
  std::optional<Rational> ray;
  if (mode == kmsflow::Mode::Unbounded) ray = top + rng.rational(Q("1/2"), 3, 4);
  return kmsflow::AdmissibleSet({{a, b}}, pts, ray);
}

inline kmsflow::Scenario random_scenario(Rng& rng, kmsflow::Mode mode, int max_vertices = 4) {
  int n = rng.integer(1, max_vertices);
  kmsflow::Simplex s(n);
  std::vector<int> face;
  for (int v = 0; v < n; ++v)
    if (rng.coin()) face.push_back(v);
  if (face.empty()) face.push_back(rng.integer(0, n - 1));
  return kmsflow::Scenario(s, kmsflow::Face(s, face), random_set(rng, mode), mode);
}

inline kmsflow::GroupElement random_group_element(Rng& rng, int n, int terms, int exp_bound = 4, int coeff_bound = 10) {
  std::map<int, kmsflow::AffineElement> t;
  for (int i = 0; i < terms; ++i) {
    std::vector<Rational> v(n);
    for (auto& q : v) q = rng.small_rational(coeff_bound, 4);
    t.try_emplace(rng.integer(-exp_bound, exp_bound), kmsflow::AffineElement::zero(n)).first->second += kmsflow::AffineElement(v);
  }
  return kmsflow::GroupElement(n, t);
}

// Positive in either cone: monomials with coefficients positive at every vertex.
inline kmsflow::GroupElement random_slack(Rng& rng, int n) {
  kmsflow::GroupElement s(n);
  int terms = rng.integer(1, 2);
  for (int i = 0; i < terms; ++i) {
    std::vector<Rational> v(n);
    for (auto& q : v) q = rng.rational(Q("1/4"), 3, 8);
    s += kmsflow::GroupElement::at(rng.integer(-4, 4), kmsflow::AffineElement(v));
  }
  return s;
}

// Feasible by construction: c^i = g0 - s_i and d^j = g0 + s'_j.
struct RandomProblem {
  kmsflow::GroupElement g0;
  std::array<kmsflow::GroupElement, 2> lowers, uppers;
  kmsflow::Scenario scenario;
};

inline RandomProblem random_problem(Rng& rng, kmsflow::Mode mode) {
  kmsflow::Scenario sc = random_scenario(rng, mode);
  int n = sc.vertex_count();
  kmsflow::GroupElement g0 = random_group_element(rng, n, rng.integer(1, 4));
  std::array<kmsflow::GroupElement, 2> lo{g0 - random_slack(rng, n), g0 - random_slack(rng, n)};
  std::array<kmsflow::GroupElement, 2> up{g0 + random_slack(rng, n), g0 + random_slack(rng, n)};
  return {g0, lo, up, sc};
}

}  // namespace testing_support
