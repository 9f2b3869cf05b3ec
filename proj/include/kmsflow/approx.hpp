#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "kmsflow/errors.hpp"
#include "kmsflow/laurent.hpp"
#include "kmsflow/positivity.hpp"

namespace kmsflow {

// Continuous piecewise-linear function given by knots sorted by abscissa;
// constant beyond the first and last knot.
struct PiecewiseLinear {
  std::vector<std::pair<Rational, Rational>> knots;

  Rational operator()(const Rational& t) const {
    if (knots.empty()) throw InvalidArgument("empty piecewise-linear function");
    if (t <= knots.front().first) return knots.front().second;
    if (t >= knots.back().first) return knots.back().second;
    auto it = std::upper_bound(knots.begin(), knots.end(), t,
                               [](const Rational& x, const auto& k) { return x < k.first; });
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
  }
};

class ApproximationFailed : public Error {
 public:
  explicit ApproximationFailed(Rational achieved)
      : Error("approximation failed, best certified error " + to_string(achieved)), achieved_(std::move(achieved)) {}
  const Rational& achieved_bound() const { return achieved_; }

 private:
  Rational achieved_;
};

struct ApproxOptions {
  int max_terms = 48;
  bool fix_top = false;  // keep hi_exp, only widen downwards
  int max_rounds = 8;
};

struct ApproxResult {
  LaurentPoly poly;
  Rational error_bound;
  int lo_exp = 0;
  int hi_exp = 0;
};

namespace detail {

struct FitSample {
  Rational t;
  long double y;
  long double w;
};

inline long double ld(const Rational& q) {
  long e1 = 0, e2 = 0;
  double n = mpz_get_d_2exp(&e1, q.get_num_mpz_t());
  double d = mpz_get_d_2exp(&e2, q.get_den_mpz_t());
  return std::ldexp(static_cast<long double>(n) / static_cast<long double>(d), static_cast<int>(e1 - e2));
}

inline Rational exact(long double x) {
  double hi = static_cast<double>(x);
  double lo = static_cast<double>(x - static_cast<long double>(hi));
  return from_double(hi) + from_double(lo);
}

// Weighted least squares by Householder QR with a tiny ridge term.
inline std::vector<long double> least_squares(std::vector<std::vector<long double>> a, std::vector<long double> b) {
  std::size_t n = a.empty() ? 0 : a[0].size();
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<long double> row(n, 0.0L);
    row[j] = 1e-13L;
    a.push_back(row);
    b.push_back(0.0L);
  }
  std::size_t m = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    long double norm = 0;
    for (std::size_t i = k; i < m; ++i) norm += a[i][k] * a[i][k];
    norm = std::sqrt(norm);
    if (norm == 0) continue;
    long double alpha = a[k][k] > 0 ? -norm : norm;
    std::vector<long double> v(m, 0.0L);
    v[k] = a[k][k] - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i] = a[i][k];
    long double vv = 0;
    for (std::size_t i = k; i < m; ++i) vv += v[i] * v[i];
    if (vv == 0) continue;
    for (std::size_t j = k; j < n; ++j) {
      long double s = 0;
      for (std::size_t i = k; i < m; ++i) s += v[i] * a[i][j];
      s = 2 * s / vv;
      for (std::size_t i = k; i < m; ++i) a[i][j] -= s * v[i];
    }
    long double s = 0;
    for (std::size_t i = k; i < m; ++i) s += v[i] * b[i];
    s = 2 * s / vv;
    for (std::size_t i = k; i < m; ++i) b[i] -= s * v[i];
  }
  std::vector<long double> x(n, 0.0L);
  for (std::size_t k = n; k-- > 0;) {
    long double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = a[k][k] == 0 ? 0 : s / a[k][k];
  }
  return x;
}

// Fits sum_{k=lo}^{hi} c_k t^k to samples in [tmin, tmax]. Negative windows are
// fitted in u = 1/t, where the basis is far better conditioned. The fit works in
// a Chebyshev basis and is then expanded exactly into monomials.
inline LaurentPoly fit_window(const std::vector<FitSample>& samples, int lo, int hi, const Rational& tmin,
                              const Rational& tmax) {
  const bool inverted = hi < 0;
  const int base = inverted ? -hi : lo;
  const int n = hi - lo;
  Rational zmin = inverted ? 1 / tmax : tmin;
  Rational zmax = inverted ? 1 / tmin : tmax;
  Rational alpha = 2 / (zmax - zmin);
  Rational beta = -(zmax + zmin) / (zmax - zmin);
  long double la = ld(alpha), lb = ld(beta);

  std::vector<std::vector<long double>> a;
  std::vector<long double> b;
  for (const auto& s : samples) {
    long double z = inverted ? 1.0L / ld(s.t) : ld(s.t);
    long double x = la * z + lb;
    long double zb = std::pow(z, static_cast<long double>(base));
    std::vector<long double> row(n + 1);
    long double t0 = 1, t1 = x;
    for (int j = 0; j <= n; ++j) {
      long double tj = j == 0 ? 1 : (j == 1 ? x : 2 * x * t1 - t0);
      if (j >= 2) {
        t0 = t1;
        t1 = tj;
      }
      row[j] = s.w * zb * tj;
    }
    a.push_back(std::move(row));
    b.push_back(s.w * s.y);
  }
  std::vector<long double> scale(n + 1, 0.0L);
  for (int j = 0; j <= n; ++j) {
    for (const auto& row : a) scale[j] = std::max(scale[j], std::fabs(row[j]));
    if (scale[j] == 0) scale[j] = 1;
    for (auto& row : a) row[j] /= scale[j];
  }
  // Lawson reweighting pulls the least-squares fit towards the weighted minimax one.
  std::vector<long double> coef, weight(a.size(), 1.0L);
  long double best_sup = -1;
  for (int it = 0; it < 12; ++it) {
    std::vector<std::vector<long double>> wa = a;
    std::vector<long double> wb = b;
    for (std::size_t i = 0; i < a.size(); ++i) {
      long double r = std::sqrt(weight[i]);
      for (auto& x : wa[i]) x *= r;
      wb[i] *= r;
    }
    std::vector<long double> c = least_squares(std::move(wa), std::move(wb));
    std::vector<long double> res(a.size());
    long double sup = 0, total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      long double v = -b[i];
      for (int j = 0; j <= n; ++j) v += a[i][j] * c[j];
      res[i] = std::fabs(v);
      sup = std::max(sup, res[i]);
    }
    if (best_sup < 0 || sup < best_sup) {
      best_sup = sup;
      coef = c;
    }
    if (sup == 0) break;
    for (std::size_t i = 0; i < a.size(); ++i) {
      weight[i] *= res[i] / sup + 1e-6L;
      total += weight[i];
    }
    for (auto& w : weight) w /= total / static_cast<long double>(weight.size());
  }

  // Clenshaw with exact polynomial arithmetic in z.
  Polynomial X({beta, alpha});
  Polynomial b1, b2;
  for (int k = n; k >= 1; --k) {
    Polynomial bk = X * b1 * Rational(2) - b2 + Polynomial::constant(exact(coef[k] / scale[k]));
    b2 = std::move(b1);
    b1 = std::move(bk);
  }
  Polynomial f = X * b1 - b2 + Polynomial::constant(exact(coef[0] / scale[0]));
  LaurentPoly z = LaurentPoly::from_polynomial(f, base);
  return inverted ? z.reflected() : z;
}

// Replace coefficients by the simplest rationals within a total budget of
// `slack` in sup norm over [tmin, tmax].
inline LaurentPoly snap(const LaurentPoly& p, const Rational& slack, const Rational& tmin, const Rational& tmax) {
  if (p.is_zero()) return p;
  Rational per = slack / static_cast<long>(p.size());
  std::map<int, Rational> out;
  for (const auto& [k, c] : p.terms()) {
    Rational m = std::max(pow(tmin, k), pow(tmax, k));
    Rational tol = per / m;
    Rational s = simplest_between(c - tol, c + tol);
    if (s != 0) out[k] = s;
  }
  return LaurentPoly(std::move(out));
}

// Certified upper bound for sup |e| on a bounded component; may exceed eps on failure.
inline Rational abs_bound_on(const LaurentPoly& e, const Component& c, const Rational& eps, std::size_t budget) {
  if (e.is_zero()) return 0;
  if (c.is_point()) return abs(e(c.lo));
  Rational worst = 0;
  for (int sign : {1, -1}) {
    LaurentPoly f = LaurentPoly::constant(eps) - e * Rational(sign);
    RefineOutcome o = refine_laurent(f, c.lo, *c.hi, RefineGoal::Positive, budget);
    worst = std::max(worst, Rational(eps - o.bound));
  }
  return worst;
}

// Certified sup |p - target| over bounded components.
inline Rational certify_error(const LaurentPoly& p, const PiecewiseLinear& target,
                              const std::vector<Component>& comps, const Rational& eps, std::size_t budget = 256) {
  Rational worst = 0;
  const auto& k = target.knots;
  for (const auto& c : comps) {
    // Linear pieces: (-inf, k0], [k0, k1], ..., [k_last, inf).
    for (std::size_t i = 0; i <= k.size(); ++i) {
      Rational l = c.lo, r = *c.hi;
      if (i > 0) l = std::max(l, k[i - 1].first);
      if (i < k.size()) r = std::min(r, k[i].first);
      if (l > r) continue;
      LaurentPoly line;
      if (i == 0) {
        line = LaurentPoly::constant(k.front().second);
      } else if (i == k.size()) {
        line = LaurentPoly::constant(k.back().second);
      } else {
        Rational slope = (k[i].second - k[i - 1].second) / (k[i].first - k[i - 1].first);
        line = LaurentPoly::constant(k[i - 1].second - slope * k[i - 1].first) + LaurentPoly::monomial(1, slope);
      }
      worst = std::max(worst, abs_bound_on(p - line, Component{l, r}, eps, budget));
      if (worst > eps) return worst;
    }
  }
  return worst;
}

// A short rational within a relative 1e-12 of x.
inline Rational snap_value(long double x) {
  if (x == 0) return 0;
  Rational c = exact(x);
  Rational tol = abs(c) / Rational(1000000000000L);
  return simplest_between(c - tol, c + tol);
}

inline Rational unit_position(long double x) {
  x = std::clamp(x, 0.0L, 1.0L);
  return simplest_between(exact(std::max(0.0L, x - 1e-9L)), exact(std::min(1.0L, x + 1e-9L)));
}

// Sample grid over bounded components: Chebyshev-Lobatto nodes per interval plus
// the given extra abscissae.
inline std::vector<Rational> sample_grid(const std::vector<Component>& comps, int per_unit,
                                         const std::vector<Rational>& extra = {}) {
  Rational total = 0;
  for (const auto& c : comps) total += *c.hi - c.lo;
  std::vector<Rational> out;
  for (const auto& c : comps) {
    if (c.is_point()) {
      out.push_back(c.lo);
      continue;
    }
    Rational len = *c.hi - c.lo;
    int k = std::max(8, static_cast<int>(std::ceil(to_double(len / total) * per_unit)) + 2);
    for (int i = 0; i <= k; ++i) {
      long double x = (1 - std::cos(static_cast<long double>(M_PI) * i / k)) / 2;
      out.push_back(c.lo + len * unit_position(x));
    }
    for (const auto& e : extra)
      if (c.contains(e)) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline Rational comps_min(const std::vector<Component>& comps) { return comps.front().lo; }
inline Rational comps_max(const std::vector<Component>& comps) {
  Rational m = 0;
  for (const auto& c : comps) m = std::max(m, *c.hi);
  return m;
}

inline ApproxResult approx_on_components(const PiecewiseLinear& target, const Rational& eps, int lo, int hi,
                                         const std::vector<Component>& comps, const ApproxOptions& opt) {
  if (lo > hi) throw InvalidArgument("empty exponent window");
  if (eps <= 0) throw InvalidArgument("epsilon must be positive");
  if (comps.empty()) throw InvalidArgument("empty set");
  for (const auto& c : comps)
    if (c.is_ray()) throw InvalidArgument("approximation needs a compact set");
  Rational tmin = comps_min(comps), tmax = comps_max(comps);
  if (tmin == tmax) {
    int k = opt.fix_top ? hi : std::clamp(0, lo, hi);
    LaurentPoly p = LaurentPoly::monomial(k, target(tmin) / pow(tmin, k));
    return {p, 0, lo, hi};
  }
  std::vector<Rational> knots;
  for (const auto& kv : target.knots) knots.push_back(kv.first);
  Rational best = -1;
  for (int round = 0; round < opt.max_rounds; ++round) {
    int l = opt.fix_top ? lo - 4 * round : lo - 2 * round;
    int h = opt.fix_top ? hi : hi + 2 * round;
    if (h - l + 1 > opt.max_terms) break;
    std::vector<FitSample> samples;
    for (const auto& t : sample_grid(comps, 4 * (h - l + 1), knots)) {
      bool isolated = std::any_of(comps.begin(), comps.end(), [&](const Component& c) { return c.is_point() && c.lo == t; });
      samples.push_back({t, ld(target(t)), isolated ? 8.0L : 1.0L});
    }
    LaurentPoly p = snap(fit_window(samples, l, h, tmin, tmax), eps / 16, tmin, tmax);
    Rational err = certify_error(p, target, comps, eps);
    if (err <= eps) return {p, err, l, h};
    if (best < 0 || err < best) best = err;
  }
  throw ApproximationFailed(best < 0 ? eps : best);
}

}  // namespace detail

inline ApproxResult approx_on(const PiecewiseLinear& target, const Rational& eps, int lo_exp, int hi_exp,
                              const AdmissibleSet& s, const ApproxOptions& opt = {}) {
  if (!s.is_compact()) throw InvalidArgument("approx_on needs a compact set");
  return detail::approx_on_components(target, eps, lo_exp, hi_exp, s.components(), opt);
}

// f = sum_k a_k (t^k - t^0) whenever f(1) = 0.
inline std::map<std::pair<int, int>, Rational> vanish_at_one_basis(const LaurentPoly& f) {
  if (f.coefficient_sum() != 0) throw InvalidArgument("f(1) must vanish");
  std::map<std::pair<int, int>, Rational> out;
  for (const auto& [k, a] : f.terms())
    if (k != 0) out[{k, 0}] = a;
  return out;
}

}  // namespace kmsflow
