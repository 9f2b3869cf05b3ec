#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kmsflow/approx.hpp"
#include "kmsflow/dimgroup.hpp"
#include "kmsflow/lp.hpp"

namespace kmsflow {

struct InterpolationProblem {
  std::array<GroupElement, 2> lowers;
  std::array<GroupElement, 2> uppers;
  Scenario scenario;
};

// What a run did; the CLI writes it out as JSON.
struct InterpolationTrace {
  std::string engine;
  bool degenerate = false;
  Rational delta;        // half the certified gap on the compact region
  Rational fit_epsilon;  // approximation tolerance actually used
  int cover_points = 0;
  std::optional<Rational> epsilon;   // ray separation of the lex element
  std::optional<Rational> epsilon1;  // margin of the compact-part element
  std::optional<Rational> kappa;
  std::optional<Rational> R;
  std::optional<int> J;
  std::optional<int> J_prime;
  std::vector<int> lead_exponents;  // l_1, l_2, l'_1, l'_2
  std::vector<int> final_lead_exponents;
  bool lex_equal = false;
  int cutoff_terms = 0;
  int lp_samples = 0;
  std::optional<std::pair<int, int>> window;
  int retries = 0;
};

class PreconditionViolated : public Error {
 public:
  PreconditionViolated(int lower, int upper)
      : Error("d" + std::to_string(upper + 1) + " - c" + std::to_string(lower + 1) + " is not positive"),
        lower_(lower), upper_(upper) {}
  int lower() const { return lower_; }
  int upper() const { return upper_; }

 private:
  int lower_, upper_;
};

class RetriesExhausted : public Error {
 public:
  RetriesExhausted(const std::string& what, InterpolationTrace trace)
      : Error("retries exhausted: " + what), trace_(std::move(trace)) {}
  const InterpolationTrace& trace() const { return trace_; }

 private:
  InterpolationTrace trace_;
};

struct ExponentWindow {
  int lo = 0;
  int hi = 0;
};

class Infeasible : public Error {
 public:
  explicit Infeasible(ExponentWindow w)
      : Error("no interpolant with exponents in [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) + "]"),
        window_(w) {}
  const ExponentWindow& window() const { return window_; }

 private:
  ExponentWindow window_;
};

struct RieszOptions {
  int max_retries = 6;
  int max_terms = 48;
  int lp_refinements = 24;
  int max_cutoff_terms = 40;
};

// ---------------------------------------------------------------------------
// Lexicographic sequences

struct LexSequence {
  int vertex_count = 1;
  std::vector<AffineElement> entries;

  AffineElement at(std::size_t k) const {
    return k < entries.size() ? entries[k] : AffineElement::zero(vertex_count);
  }
  bool operator==(const LexSequence& o) const {
    std::size_t len = std::max(entries.size(), o.entries.size());
    for (std::size_t k = 0; k < len; ++k)
      if (at(k) != o.at(k)) return false;
    return vertex_count == o.vertex_count;
  }
};

enum class Side { Lower, Upper };

struct LexEqual {
  Side side = Side::Lower;
  int which = 0;
};

using LexResult = std::variant<LexSequence, LexEqual>;

namespace detail {

inline bool strictly_below(const AffineElement& a, const AffineElement& b) {
  for (int v = 0; v < a.size(); ++v)
    if (!(a[v] < b[v])) return false;
  return true;
}

// a <=_lex b in the strict vertex order: first difference strictly positive everywhere.
inline bool lex_leq(const LexSequence& a, const LexSequence& b) {
  std::size_t len = std::max(a.entries.size(), b.entries.size());
  for (std::size_t k = 0; k < len; ++k) {
    AffineElement x = a.at(k), y = b.at(k);
    if (x == y) continue;
    return strictly_below(x, y);
  }
  return true;
}

inline AffineElement pointwise_max(const std::vector<AffineElement>& xs) {
  AffineElement m = xs.front();
  for (const auto& x : xs)
    for (int v = 0; v < m.size(); ++v) m[v] = std::max(m[v], x[v]);
  return m;
}

inline AffineElement pointwise_min(const std::vector<AffineElement>& xs) {
  AffineElement m = xs.front();
  for (const auto& x : xs)
    for (int v = 0; v < m.size(); ++v) m[v] = std::min(m[v], x[v]);
  return m;
}

// Walk down the indices while the choice of h is forced by a tied pair.
struct LexWalk {
  std::vector<AffineElement> forced;  // h_0 .. h_{k0-1}
  std::size_t k0 = 0;                 // first free index; == length when nothing is free
  std::vector<int> lower_active, upper_active;
  std::array<std::size_t, 2> lower_lead{}, upper_lead{};  // index where each pair member separates from h
};

inline LexWalk lex_walk(const std::array<LexSequence, 2>& lo, const std::array<LexSequence, 2>& up) {
  LexWalk w;
  w.lower_active = {0, 1};
  w.upper_active = {0, 1};
  std::size_t len = 0;
  for (const auto* s : {&lo[0], &lo[1], &up[0], &up[1]}) len = std::max(len, s->entries.size());
  std::size_t k = 0;
  for (; k < len; ++k) {
    if (w.lower_active.empty() || w.upper_active.empty()) break;
    std::optional<AffineElement> tie;
    for (int i : w.lower_active)
      for (int j : w.upper_active)
        if (lo[i].at(k) == up[j].at(k)) tie = lo[i].at(k);
    if (!tie) break;
    w.forced.push_back(*tie);
    std::vector<int> keep;
    for (int i : w.lower_active) {
      if (lo[i].at(k) == *tie)
        keep.push_back(i);
      else
        w.lower_lead[i] = k;
    }
    w.lower_active = keep;
    keep.clear();
    for (int j : w.upper_active) {
      if (up[j].at(k) == *tie)
        keep.push_back(j);
      else
        w.upper_lead[j] = k;
    }
    w.upper_active = keep;
  }
  w.k0 = k;
  for (int i : w.lower_active) w.lower_lead[i] = k;
  for (int j : w.upper_active) w.upper_lead[j] = k;
  return w;
}

}  // namespace detail

inline LexResult lex_interpolate(const std::array<LexSequence, 2>& lowers, const std::array<LexSequence, 2>& uppers) {
  const int n = lowers[0].vertex_count;
  for (const auto* s : {&lowers[0], &lowers[1], &uppers[0], &uppers[1]}) {
    if (s->vertex_count != n) throw DimensionMismatch("lex sequences over different simplices");
    for (const auto& e : s->entries)
      if (e.size() != n) throw DimensionMismatch("lex entry has the wrong dimension");
  }
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (!detail::lex_leq(lowers[i], uppers[j]))
        throw InvalidArgument("lex sequences are not ordered: lower " + std::to_string(i + 1) + " vs upper " +
                              std::to_string(j + 1));

  detail::LexWalk w = detail::lex_walk(lowers, uppers);
  std::size_t len = 0;
  for (const auto* s : {&lowers[0], &lowers[1], &uppers[0], &uppers[1]}) len = std::max(len, s->entries.size());
  if (w.k0 >= len) {
    if (!w.lower_active.empty()) return LexEqual{Side::Lower, w.lower_active.front()};
    return LexEqual{Side::Upper, w.upper_active.front()};
  }
  LexSequence h{n, w.forced};
  std::vector<AffineElement> a, b;
  for (int i : w.lower_active) a.push_back(lowers[i].at(w.k0));
  for (int j : w.upper_active) b.push_back(uppers[j].at(w.k0));
  AffineElement pick = AffineElement::zero(n);
  if (!a.empty() && !b.empty())
    pick = (detail::pointwise_max(a) + detail::pointwise_min(b)) * ratio(1, 2);
  else if (!a.empty())
    pick = detail::pointwise_max(a) + AffineElement::constant(n, 1);
  else
    pick = detail::pointwise_min(b) - AffineElement::constant(n, 1);
  h.entries.push_back(pick);
  while (h.entries.size() < len) h.entries.push_back(AffineElement::zero(n));
  return h;
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::array<GroupElement, 4> differences(const std::array<GroupElement, 2>& lo, const std::array<GroupElement, 2>& up,
                                               const GroupElement& g) {
  return {g - lo[0], g - lo[1], up[0] - g, up[1] - g};
}

inline void check_problem(const InterpolationProblem& p, Mode mode) {
  const Scenario& sc = p.scenario;
  if (sc.mode() != mode) throw InvalidArgument("scenario mode does not match the interpolation engine");
  for (const auto* g : {&p.lowers[0], &p.lowers[1], &p.uppers[0], &p.uppers[1]})
    if (g->vertex_count() != sc.vertex_count()) throw DimensionMismatch("input and scenario dimensions differ");
}

inline void check_preconditions(const InterpolationProblem& p) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (!order_test(p.uppers[j] - p.lowers[i], p.scenario).nonnegative()) throw PreconditionViolated(i, j);
}

inline std::optional<GroupElement> degenerate_pair(const InterpolationProblem& p) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (p.lowers[i] == p.uppers[j]) return p.lowers[i];
  return std::nullopt;
}

inline bool verify_between(const std::array<GroupElement, 2>& lo, const std::array<GroupElement, 2>& up,
                           const GroupElement& g, const Scenario& sc, std::optional<PositivityWitness>* witness = nullptr) {
  for (const auto& d : differences(lo, up, g)) {
    OrderVerdict v = order_test(d, sc, false);
    if (!v.positive()) {
      if (witness) *witness = v.witness;
      return false;
    }
  }
  return true;
}

inline AdmissibleSet set_of(const std::vector<Component>& comps) {
  std::vector<Interval> iv;
  std::vector<Rational> pts;
  std::optional<Rational> ray;
  for (const auto& c : comps) {
    if (c.is_ray())
      ray = c.lo;
    else if (c.is_point())
      pts.push_back(c.lo);
    else
      iv.push_back({c.lo, *c.hi});
  }
  return AdmissibleSet(iv, pts, ray);
}

inline Range laurent_poly_range(const LaurentPoly& p, const Rational& a, const Rational& b) {
  if (p.is_zero()) return {0, 0};
  auto [poly, e] = p.cleared();
  return laurent_range(poly, e, a, b);
}

// Simple rationals near the Chebyshev-Lobatto nodes of [a, b].
inline std::vector<Rational> chebyshev_samples(const Rational& a, const Rational& b, int k) {
  std::vector<Rational> out;
  if (a == b) return {a};
  Rational tol = ratio(1, 8L * k * k);
  for (int i = 0; i <= k; ++i) {
    long double x = (1 - std::cos(static_cast<long double>(M_PI) * i / k)) / 2;
    Rational c = exact(x);
    Rational r = i == 0 ? Rational(0) : i == k ? Rational(1) : simplest_between(std::max(Rational(0), Rational(c - tol)), std::min(Rational(1), Rational(c + tol)));
    out.push_back(a + (b - a) * r);
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct CoreOptions {
  int lo_exp = 0;
  int hi_exp = 0;
  bool fix_top = false;
  int max_retries = 6;
  int max_terms = 48;
};

// Compact interpolation on the bounded components `comps` (containing 1) of a
// face scenario: midpoints of the envelopes at cover points, glued by hat
// functions, approximated vertex by vertex and checked exactly.
inline GroupElement compact_core(const std::array<GroupElement, 2>& lo, const std::array<GroupElement, 2>& up,
                                 const Face& face, const std::vector<Component>& comps, const CoreOptions& opt,
                                 InterpolationTrace& tr) {
  const int n = face.vertex_count();
  Scenario region(Simplex(n), face, set_of(comps), Mode::Compact);

  Rational gap;
  bool first = true;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      OrderVerdict v = order_test(up[j] - lo[i], region);
      if (!v.positive()) throw InternalError("compact region gap is not positive");
      if (first || v.margin < gap) gap = v.margin;
      first = false;
    }
  const Rational delta = gap / 2;
  tr.delta = delta;

  std::vector<std::array<LaurentPoly, 4>> env(n);
  for (int v = 0; v < n; ++v)
    env[v] = {lo[0].vertex_poly(v), lo[1].vertex_poly(v), up[0].vertex_poly(v), up[1].vertex_poly(v)};
  auto midpoint = [&](int v, const Rational& t) -> Rational {
    const auto& e = env[v];
    return (std::max(e[0](t), e[1](t)) + std::min(e[2](t), e[3](t))) / 2;
  };

  const auto& fv = face.vertices();
  std::vector<int> off = face.complement();
  const Rational clearance = delta / 2;
  // How far a chord may stray from the midpoint curve; smaller means a smoother target.
  Rational smooth = delta / 2;
  Rational span = comps.back().hi ? *comps.back().hi - comps.front().lo : Rational(1);
  std::optional<Rational> max_len;
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt, smooth /= 2) {
    tr.retries = attempt;
    tr.fit_epsilon = smooth;
    if (attempt > 0) max_len = span / (Integer(1) << (attempt + 2));
    // Cover points: bisect until the chord between the midpoints at the ends of
    // each piece keeps `clearance` from every envelope on the face.
    auto chord_ok = [&](const Rational& a, const Rational& b) {
      if (max_len && b - a > *max_len) return false;
      for (int v : fv) {
        Rational ma = midpoint(v, a), mb = midpoint(v, b);
        Rational slope = (mb - ma) / (b - a);
        LaurentPoly line = LaurentPoly::constant(ma - slope * a) + LaurentPoly::monomial(1, slope);
        for (int r = 0; r < 4; ++r) {
          LaurentPoly room = r < 2 ? line - env[v][r] : env[v][r] - line;
          if (laurent_poly_range(room, a, b).lo < clearance) return false;
        }
        // Heuristic only: a chord far from the midpoint curve leaves kinks the fit cannot follow.
        for (int k = 1; k <= 3; ++k) {
          Rational t = a + (b - a) * ratio(k, 4);
          if (abs(Rational(line(t) - midpoint(v, t))) > smooth) return false;
        }
      }
      return true;
    };
    std::vector<Rational> knots;
    for (const auto& c : comps) {
      if (c.is_point()) {
        knots.push_back(c.lo);
        continue;
      }
      std::vector<std::pair<Rational, Rational>> todo;
      if (c.contains(1) && c.lo < 1 && 1 < *c.hi) {
        todo.push_back({c.lo, 1});
        todo.push_back({1, *c.hi});
      } else {
        todo.push_back({c.lo, *c.hi});
      }
      while (!todo.empty()) {
        auto [a, b] = todo.back();
        todo.pop_back();
        if (b - a < ratio(1, 1 << 20) || chord_ok(a, b)) {
          knots.push_back(a);
          knots.push_back(b);
        } else {
          Rational m = simplest_between((3 * a + b) / 4, (a + 3 * b) / 4);
          todo.push_back({a, m});
          todo.push_back({m, b});
        }
      }
    }
    knots.push_back(1);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    tr.cover_points = static_cast<int>(knots.size());

    // Face values at each cover point; off the face, the extension away from 1
    // and the midpoint at 1.
    std::vector<PiecewiseLinear> target(n);
    for (const auto& t : knots) {
      AffineElement at = AffineElement::zero(n);
      for (int v : fv) at[v] = midpoint(v, t);
      if (t == 1) {
        for (int w : off) at[w] = midpoint(w, t);
      } else if (!off.empty()) {
        at = extend_from_face(at, face, off.front(), 1);
      }
      for (int v = 0; v < n; ++v) target[v].knots.push_back({t, at[v]});
    }

    // Fit each face vertex to the glued target, weighted by the room left to
    // the envelopes, and check the result exactly against the envelopes.
    Rational tmin = comps.front().lo, tmax = detail::comps_max(comps);
    for (int round = 0; round < 8; ++round) {
      int l = opt.fix_top ? opt.lo_exp - 4 * round : opt.lo_exp - 2 * round;
      int h = opt.fix_top ? opt.hi_exp : opt.hi_exp + 2 * round;
      if (h - l + 1 > opt.max_terms) break;
      std::vector<LaurentPoly> polys(n);
      for (int v = 0; v < n; ++v) {
        if (!face.contains(v) || tmin == tmax) {
          int k = opt.fix_top ? h : std::clamp(0, l, h);
          Rational at = face.contains(v) ? target[v](tmin) : target[v](1);
          polys[v] = LaurentPoly::monomial(k, at / pow(face.contains(v) ? tmin : Rational(1), k));
          continue;
        }
        std::vector<FitSample> samples;
        Rational least_room;
        bool first_room = true;
        for (const auto& t : detail::sample_grid(comps, 4 * (h - l + 1), knots)) {
          Rational y = target[v](t);
          const auto& e = env[v];
          Rational room = std::min(Rational(y - std::max(e[0](t), e[1](t))), Rational(std::min(e[2](t), e[3](t)) - y));
          if (room <= 0) room = clearance;
          if (first_room || room < least_room) least_room = room;
          first_room = false;
          bool isolated = std::any_of(comps.begin(), comps.end(), [&](const Component& c) { return c.is_point() && c.lo == t; });
          samples.push_back({t, detail::ld(y), (isolated ? 4.0L : 1.0L) / detail::ld(room)});
        }
        polys[v] = detail::snap(detail::fit_window(samples, l, h, tmin, tmax), least_room / 16, tmin, tmax);
      }
      GroupElement g = GroupElement::from_vertex_polys(polys);
      if (verify_between(lo, up, g, region)) return g;
    }
  }
  throw RetriesExhausted("compact interpolation did not certify", tr);
}

inline std::pair<int, int> exponent_hull(std::initializer_list<const GroupElement*> gs) {
  int lo = 0, hi = 0;
  bool first = true;
  for (const auto* g : gs)
    for (const auto& [m, a] : g->terms()) {
      if (first || m < lo) lo = m;
      if (first || m > hi) hi = m;
      first = false;
    }
  return {lo, hi};
}

}  // namespace detail

inline GroupElement interpolate_compact(const InterpolationProblem& p, InterpolationTrace* trace = nullptr,
                                        const RieszOptions& opt = {}) {
  detail::check_problem(p, Mode::Compact);
  detail::check_preconditions(p);
  InterpolationTrace tr;
  tr.engine = "compact";
  if (auto z = detail::degenerate_pair(p)) {
    tr.degenerate = true;
    if (trace) *trace = tr;
    return *z;
  }
  auto [lo, hi] = detail::exponent_hull({&p.lowers[0], &p.lowers[1], &p.uppers[0], &p.uppers[1]});
  detail::CoreOptions co;
  co.lo_exp = std::min(lo, 0);
  co.hi_exp = std::max(hi, 0);
  co.max_retries = opt.max_retries;
  co.max_terms = opt.max_terms;
  GroupElement g = detail::compact_core(p.lowers, p.uppers, p.scenario.face(), p.scenario.L().components(), co, tr);
  if (trace) *trace = tr;
  return g;
}

// ---------------------------------------------------------------------------
// Unbounded cone

namespace detail {

inline LexSequence to_lex(const GroupElement& g, int top, int len) {
  LexSequence s{g.vertex_count(), {}};
  for (int k = 0; k < len; ++k) s.entries.push_back(g.coeff(top - k));
  return s;
}

inline std::vector<Rational> ray_samples(const Rational& from) {
  std::vector<Rational> out;
  for (int j = 0; j <= 8; ++j) out.push_back(from + from * ratio(j, 4));
  for (int j = 2; j <= 12; ++j) out.push_back(from * (Integer(1) << (j + 1)));
  return out;
}

inline std::vector<Rational> set_samples(const std::vector<Component>& comps, int per_interval) {
  std::vector<Rational> out;
  for (const auto& c : comps) {
    if (c.is_ray()) {
      for (auto& t : ray_samples(c.lo)) out.push_back(t);
    } else {
      for (auto& t : chebyshev_samples(c.lo, *c.hi, per_interval)) out.push_back(t);
    }
  }
  out.push_back(1);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void add_witness(std::vector<Rational>& samples, const std::optional<PositivityWitness>& w) {
  if (!w) return;
  samples.push_back(w->point);
  if (w->bracket) {
    samples.push_back(w->bracket->lo);
    samples.push_back(w->bracket->hi);
  }
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
}

}  // namespace detail

inline GroupElement interpolate_unbounded(const InterpolationProblem& p, InterpolationTrace* trace = nullptr,
                                          const RieszOptions& opt = {}) {
  detail::check_problem(p, Mode::Unbounded);
  detail::check_preconditions(p);
  const Scenario& sc = p.scenario;
  const int n = sc.vertex_count();
  const auto& lo = p.lowers;
  const auto& up = p.uppers;
  InterpolationTrace tr;
  tr.engine = "unbounded";
  if (auto z = detail::degenerate_pair(p)) {
    tr.degenerate = true;
    if (trace) *trace = tr;
    return *z;
  }

  // (1) Lexicographic interpolation of the coefficient strings, read from the top.
  int big_n = 0;
  for (const auto* g : {&lo[0], &lo[1], &up[0], &up[1]})
    for (const auto& [m, a] : g->terms()) big_n = std::max(big_n, std::abs(m));
  const int len = 2 * big_n + 1;
  std::array<LexSequence, 2> lbar{detail::to_lex(lo[0], big_n, len), detail::to_lex(lo[1], big_n, len)};
  std::array<LexSequence, 2> ubar{detail::to_lex(up[0], big_n, len), detail::to_lex(up[1], big_n, len)};
  LexResult lr = lex_interpolate(lbar, ubar);
  GroupElement g(n);
  if (const auto* h = std::get_if<LexSequence>(&lr)) {
    for (std::size_t k = 0; k < h->entries.size(); ++k)
      g += GroupElement::at(big_n - static_cast<int>(k), h->entries[k]);
  } else {
    // Pad the tied input at a fresh lower index, by less than half of every gap.
    tr.lex_equal = true;
    const LexEqual& eq = std::get<LexEqual>(lr);
    const GroupElement& base = eq.side == Side::Lower ? lo[eq.which] : up[eq.which];
    Rational c = 1;
    for (int step = 0;; ++step, c /= 2) {
      if (step > 64) throw InternalError("lex padding search exceeded its cap");
      GroupElement pad = GroupElement::at(-big_n - 1, AffineElement::constant(n, c));
      bool ok = true;
      for (int k = 0; k < 2 && ok; ++k) {
        GroupElement room = eq.side == Side::Lower ? up[k] - base : base - lo[k];
        ok = order_test(room - pad * Rational(2), sc).positive();
      }
      if (ok) {
        g = eq.side == Side::Lower ? base + pad : base - pad;
        break;
      }
    }
  }
  // R and epsilon: past R every relation, scaled by its leading power, stays
  // above 2 epsilon on L.
  const auto& fv = sc.face().vertices();
  auto radius = [&](const GroupElement& h, const Rational& cap) -> std::optional<std::pair<Rational, Rational>> {
    std::array<GroupElement, 4> d = detail::differences(lo, up, h);
    for (Rational r = 2; r <= cap; r *= 2) {
      std::vector<Component> tail = sc.L().tail_from(r);
      bool ok = true;
      std::optional<Rational> m;
      for (int k = 0; k < 4 && ok; ++k) {
        int e = *degree_and_leading(d[k]).degree;
        for (int v : fv) {
          LaurentPoly f = d[k].vertex_poly(v).shifted(-e);
          if (!detail::positive_on(f, tail).positive) {
            ok = false;
            break;
          }
          Rational b = detail::margin_on(f, tail);
          if (!m || b < *m) m = b;
        }
      }
      if (ok) return std::pair{r, *m / 2};
    }
    return std::nullopt;
  };
  const Rational cap(Integer(1) << 20);
  auto best = radius(g, cap);
  if (!best) throw InternalError("no separation radius found");
  // Entries below the deciding index do not affect the lex order. Zeros can push
  // R far out, which makes the cutoff steep; try the inputs' own tails as well.
  if (!tr.lex_equal && best->first > 4) {
    const int decide = big_n - static_cast<int>(detail::lex_walk(lbar, ubar).k0);
    auto with_tail = [&](const GroupElement& src) {
      GroupElement h(n);
      for (const auto& [m, a] : g.terms())
        if (m >= decide) h += GroupElement::at(m, a);
      for (const auto& [m, a] : src.terms())
        if (m < decide) h += GroupElement::at(m, a);
      return h;
    };
    GroupElement mid = (lo[0] + lo[1] + up[0] + up[1]) * ratio(1, 4);
    for (const GroupElement* src : std::initializer_list<const GroupElement*>{&mid, &lo[0], &lo[1], &up[0], &up[1]}) {
      GroupElement h = with_tail(*src);
      if (auto r = radius(h, best->first / 2)) {
        best = r;
        g = h;
      }
    }
  }
  Rational big_r = best->first, eps = best->second;
  std::array<GroupElement, 4> diff = detail::differences(lo, up, g);
  std::array<int, 4> lead{};
  for (int r = 0; r < 4; ++r) {
    lead[r] = *degree_and_leading(diff[r]).degree;
    tr.lead_exponents.push_back(lead[r]);
  }
  tr.R = big_r;
  tr.epsilon = eps;

  int big_j = 1;
  for (const GroupElement* x : std::initializer_list<const GroupElement*>{&g, &lo[0], &lo[1], &up[0], &up[1]})
    for (const auto& [m, a] : x->terms()) big_j = std::max(big_j, std::abs(m));
  tr.J = big_j;

  // (2) Compact-part interpolant on L within (0, R+1].
  std::vector<Component> near = sc.L().truncated(big_r + 1);
  auto [hull_lo, hull_hi] = detail::exponent_hull({&lo[0], &lo[1], &up[0], &up[1]});
  detail::CoreOptions co;
  co.lo_exp = std::min(hull_lo, 0);
  co.hi_exp = std::max(hull_hi, 0);
  co.max_retries = opt.max_retries;
  co.max_terms = opt.max_terms;
  InterpolationTrace inner;
  GroupElement g1 = detail::compact_core(lo, up, sc.face(), near, co, inner);
  tr.delta = inner.delta;
  tr.fit_epsilon = inner.fit_epsilon;
  tr.cover_points = inner.cover_points;
  {
    Scenario region(Simplex(n), sc.face(), detail::set_of(near), Mode::Compact);
    std::optional<Rational> m;
    for (const auto& d : detail::differences(lo, up, g1)) {
      Rational b = order_test(d, region).margin;
      if (!m || b < *m) m = b;
    }
    tr.epsilon1 = *m / 2;
  }

  // Every exponent of q (g1 - g) must sit below the leading exponents, so q
  // starts at t^{-J'} with J' past the top exponents of g and g1.
  int top = 0;
  for (const GroupElement* x : {&g, &g1})
    if (!x->is_zero()) top = std::max(top, x->terms().rbegin()->first);
  const int jp = std::max(1, top + 1 - std::min(0, *std::min_element(lead.begin(), lead.end())));
  tr.J_prime = jp;

  // (3) Cutoff q in t^{-J'}, t^{-J'-1}, ...  Writing g4 = (1 - q) g + q g1, each
  // scaled relation is A + q (B - A) with A from g and B from g1. q is chosen by
  // an LP maximising the worst of these over samples, and g4 is then checked
  // exactly. The LP works in the basis (u/umax)^{J'} T_k(2u/umax - 1), u = R/t.
  std::array<GroupElement, 4> diff1 = detail::differences(lo, up, g1);
  const Rational umax = big_r / sc.L().components().front().lo;
  const long double lumax = detail::ld(umax);
  // Chebyshev nodes in u on each component, denser with more terms, plus witnesses.
  std::vector<Rational> witnesses;
  auto grid = [&](int terms) {
    std::vector<Rational> out{1};
    for (const auto& c : sc.L().components()) {
      if (c.is_point()) {
        out.push_back(c.lo);
        continue;
      }
      Rational ua = c.hi ? big_r / *c.hi : Rational(0), ub = big_r / c.lo;
      int k = std::max(8, static_cast<int>(std::ceil(to_double((ub - ua) / umax) * 12 * terms)) + 4);
      for (const auto& u : detail::chebyshev_samples(ua, ub, k))
        if (u > 0) out.push_back(big_r / u);
    }
    for (const auto& t : detail::chebyshev_samples(big_r, big_r + 1, 8))
      if (sc.L().contains(t)) out.push_back(t);
    out.insert(out.end(), witnesses.begin(), witnesses.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  auto basis_at = [&](long double u, int terms) {
    long double x = 2 * u - 1;
    std::vector<long double> out(terms);
    long double base = std::pow(u, static_cast<long double>(jp));
    long double t0 = 1, t1 = x;
    for (int k = 0; k < terms; ++k) {
      long double tk = k == 0 ? 1 : (k == 1 ? x : 2 * x * t1 - t0);
      if (k >= 2) {
        t0 = t1;
        t1 = tk;
      }
      out[k] = base * tk;
    }
    return out;
  };
  auto basis_row = [&](const Rational& t, int terms) { return basis_at(detail::ld(big_r / t) / lumax, terms); };
  // Long double copies of the scaled relations on the face, for screening.
  using LdPoly = std::vector<std::pair<int, long double>>;
  auto to_ld = [](const LaurentPoly& f) {
    LdPoly out;
    for (const auto& [k, c] : f.terms()) out.push_back({k, detail::ld(c)});
    return out;
  };
  auto eval_ld = [](const LdPoly& f, long double t) {
    long double v = 0;
    for (const auto& [k, c] : f) v += c * std::pow(t, static_cast<long double>(k));
    return v;
  };
  std::vector<std::array<LdPoly, 2>> screen_rel;
  std::vector<int> screen_lead;
  for (int r = 0; r < 4; ++r)
    for (int v : fv) {
      screen_rel.push_back({to_ld(diff[r].vertex_poly(v)), to_ld(diff1[r].vertex_poly(v))});
      screen_lead.push_back(lead[r]);
    }
  // Local minima (in u) where the candidate dips below kappa / 4, worst first.
  // The dips can be narrow where the lex relations are large, so the grid is fine.
  auto screen = [&](const std::vector<Rational>& coef, const Rational& kap) {
    std::vector<std::pair<long double, Rational>> bad;
    const int terms = static_cast<int>(coef.size());
    std::vector<long double> a(terms);
    for (int k = 0; k < terms; ++k) a[k] = detail::ld(coef[k]);
    const long double lr = detail::ld(big_r), limit = detail::ld(kap) / 4;
    for (const auto& c : sc.L().components()) {
      if (c.is_point()) continue;
      long double ua = c.hi ? lr / detail::ld(*c.hi) : 0.0L, ub = lr / detail::ld(c.lo);
      int k = std::max(256, static_cast<int>(std::ceil((ub - ua) / lumax * 1024 * terms)));
      std::vector<long double> us, vals;
      for (int i = 0; i <= k; ++i) {
        long double u = ua + (ub - ua) * (1 - std::cos(static_cast<long double>(M_PI) * i / k)) / 2;
        if (u <= 0) continue;
        long double t = lr / u;
        std::vector<long double> phi = basis_at(u / lumax, terms);
        long double q = 0;
        for (int j = 0; j < terms; ++j) q += phi[j] * a[j];
        long double worst = 1e300L;
        for (std::size_t r = 0; r < screen_rel.size(); ++r) {
          long double sc_ = std::pow(t, static_cast<long double>(-screen_lead[r]));
          long double av = eval_ld(screen_rel[r][0], t) * sc_, bv = eval_ld(screen_rel[r][1], t) * sc_;
          worst = std::min(worst, av + q * (bv - av));
        }
        us.push_back(u);
        vals.push_back(worst);
      }
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i] >= limit) continue;
        if ((i > 0 && vals[i - 1] < vals[i]) || (i + 1 < vals.size() && vals[i + 1] < vals[i])) continue;
        Rational tq = detail::snap_value(lr / us[i]);
        tq = std::max(tq, c.lo);
        if (c.hi) tq = std::min(tq, *c.hi);
        bad.push_back({vals[i], tq});
      }
    }
    std::sort(bad.begin(), bad.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Rational> out;
    for (std::size_t i = 0; i < bad.size() && i < 16; ++i) out.push_back(bad[i].second);
    return out;
  };
  // sum_k a_k (u/umax)^{J'} T_k(2u/umax - 1) as a Laurent polynomial in t.
  auto to_cutoff = [&](const std::vector<Rational>& coef) {
    Polynomial x({Rational(-1), 2 / umax});
    Polynomial b1, b2;
    for (int k = static_cast<int>(coef.size()) - 1; k >= 1; --k) {
      Polynomial bk = x * b1 * Rational(2) - b2 + Polynomial::constant(coef[k]);
      b2 = std::move(b1);
      b1 = std::move(bk);
    }
    Polynomial f = x * b1 - b2 + Polynomial::constant(coef[0]);
    std::map<int, Rational> qt;
    Rational scale = pow(big_r / umax, jp);
    for (int j = 0; j <= f.degree(); ++j) {
      if (f[j] != 0) qt[-(jp + j)] = f[j] * scale;
      scale *= big_r;
    }
    return LaurentPoly(std::move(qt));
  };

  Rational kappa = std::min(eps, *tr.epsilon1) / 8;
  const long double box = std::ldexp(1.0L, 40);
  for (int attempt = 0; attempt <= opt.max_retries; ++attempt, kappa /= 2) {
    tr.retries = attempt;
    tr.kappa = kappa;
    for (int terms = 4; terms <= opt.max_cutoff_terms; terms += 4) {
      for (int refine = 0; refine < opt.lp_refinements; ++refine) {
        std::vector<Rational> samples = grid(terms);
        const int nv = terms + 1;  // a_0..a_{terms-1}, slack
        std::vector<std::vector<long double>> a;
        std::vector<long double> b;
        auto add_row = [&](const std::vector<long double>& phi, const Rational& av, const Rational& bv) {
          // A + q (B - A) >= s  <=>  -q (B - A) + s <= A
          std::vector<long double> row(nv);
          long double gap = detail::ld(bv - av);
          for (int k = 0; k < terms; ++k) row[k] = -phi[k] * gap;
          row[terms] = 1;
          a.push_back(std::move(row));
          b.push_back(detail::ld(av));
        };
        for (const auto& t : samples) {
          std::vector<long double> phi = basis_row(t, terms);
          for (int r = 0; r < 4; ++r) {
            Rational scale = pow(t, -lead[r]);
            for (int v : fv) add_row(phi, diff[r].vertex_poly(v)(t) * scale, diff1[r].vertex_poly(v)(t) * scale);
            if (t == 1) {
              AffineElement s0 = diff[r].coefficient_sum(), s1 = diff1[r].coefficient_sum();
              for (int w : sc.face().complement()) add_row(phi, s0[w], s1[w]);
            }
          }
        }
        for (int k = 0; k < terms; ++k)
          for (int sg : {1, -1}) {
            std::vector<long double> row(nv);
            row[k] = sg;
            a.push_back(std::move(row));
            b.push_back(box);
          }
        {
          std::vector<long double> row(nv);
          row[terms] = 1;
          a.push_back(std::move(row));
          b.push_back(1);
        }
        std::vector<long double> obj(nv);
        obj[terms] = 1;
        auto sol = lp::maximize_approx(std::move(a), std::move(b), std::move(obj));
        tr.lp_samples = static_cast<int>(samples.size());
        if (sol.status != lp::Status::Optimal || sol.x[terms] < detail::ld(kappa)) break;  // more terms needed

        // A shared dyadic grid keeps denominators from compounding in the expansion.
        long double amax = 0;
        for (int k = 0; k < terms; ++k) amax = std::max(amax, std::fabs(sol.x[k]));
        const int quantum = (amax > 0 ? std::ilogb(amax) : 0) - 50;
        std::vector<Rational> coef(terms);
        for (int k = 0; k < terms; ++k) {
          Rational c(Integer(static_cast<long>(std::llround(std::ldexp(sol.x[k], -quantum)))));
          coef[k] = quantum >= 0 ? Rational(c * pow(Rational(2), quantum)) : Rational(c / pow(Rational(2), -quantum));
        }
        LaurentPoly q = to_cutoff(coef);
        tr.cutoff_terms = static_cast<int>(q.size());
        if (auto bad = screen(coef, kappa); !bad.empty()) {
          std::size_t before = witnesses.size();
          witnesses.insert(witnesses.end(), bad.begin(), bad.end());
          std::sort(witnesses.begin(), witnesses.end());
          witnesses.erase(std::unique(witnesses.begin(), witnesses.end()), witnesses.end());
          if (witnesses.size() == before) break;
          continue;
        }
        GroupElement g4 = g - q * g + q * g1;
        std::optional<PositivityWitness> w;
        if (detail::verify_between(lo, up, g4, sc, &w)) {
          for (const auto& d : detail::differences(lo, up, g4))
            tr.final_lead_exponents.push_back(*degree_and_leading(d).degree);
          if (trace) *trace = tr;
          return g4;
        }
        if (!w) break;
        std::size_t before = witnesses.size();
        detail::add_witness(witnesses, w);
        // Neighbours in u as well: the relations can turn between samples.
        Rational u0 = big_r / w->point, h = umax / (16 * terms * terms);
        for (int j : {-2, -1, 1, 2}) {
          Rational u = u0 + h * j;
          if (u > 0 && sc.L().contains(big_r / u)) witnesses.push_back(big_r / u);
        }
        if (witnesses.size() == before) break;
      }
    }
  }
  throw RetriesExhausted("no cutoff polynomial certified", tr);
}

// ---------------------------------------------------------------------------
// LP oracle

inline GroupElement interpolate_lp(const InterpolationProblem& p, ExponentWindow window,
                                   InterpolationTrace* trace = nullptr, const RieszOptions& opt = {}) {
  const Scenario& sc = p.scenario;
  detail::check_problem(p, sc.mode());
  detail::check_preconditions(p);
  if (window.lo > window.hi) throw InvalidArgument("empty exponent window");
  const int n = sc.vertex_count();
  const auto& lo = p.lowers;
  const auto& up = p.uppers;
  InterpolationTrace tr;
  tr.engine = "lp";
  tr.window = std::pair<int, int>{window.lo, window.hi};
  if (auto z = detail::degenerate_pair(p)) {
    tr.degenerate = true;
    if (trace) *trace = tr;
    return *z;
  }
  const bool unbounded = sc.mode() == Mode::Unbounded;

  // Unbounded: the leading structure is forced from the top down to the first free
  // exponent e0, where g's coefficient must lie strictly between the live inputs.
  std::map<int, AffineElement> fixed;
  std::optional<int> e0;
  std::array<int, 4> lead{};
  std::vector<int> live_lo, live_up;
  if (unbounded) {
    auto [bottom, top] = detail::exponent_hull({&lo[0], &lo[1], &up[0], &up[1]});
    int len = top - bottom + 1;
    std::array<LexSequence, 2> lbar{detail::to_lex(lo[0], top, len), detail::to_lex(lo[1], top, len)};
    std::array<LexSequence, 2> ubar{detail::to_lex(up[0], top, len), detail::to_lex(up[1], top, len)};
    detail::LexWalk w = detail::lex_walk(lbar, ubar);
    for (std::size_t k = 0; k < w.forced.size(); ++k)
      if (!w.forced[k].is_zero()) fixed[top - static_cast<int>(k)] = w.forced[k];
    e0 = top - static_cast<int>(w.k0);
    for (int i = 0; i < 2; ++i) lead[i] = top - static_cast<int>(w.lower_lead[i]);
    for (int j = 0; j < 2; ++j) lead[2 + j] = top - static_cast<int>(w.upper_lead[j]);
    live_lo = w.lower_active;
    live_up = w.upper_active;
    for (const auto& [m, a] : fixed)
      if (m > window.hi || m < window.lo) throw Infeasible(window);
  }

  // Free exponents: the window, below e0 in the unbounded case.
  std::vector<int> exps;
  for (int k = window.lo; k <= window.hi; ++k)
    if (!e0 || k <= *e0) exps.push_back(k);
  const int per = static_cast<int>(exps.size());
  const int nv = per * n + 1;
  auto var = [&](int ki, int v) { return ki * n + v; };
  const int slack = nv - 1;

  const auto& fv = sc.face().vertices();
  std::vector<Rational> samples = detail::set_samples(sc.L().components(), std::max(8, 4 * (window.hi - window.lo + 1)));
  Rational bound = 1;
  for (const auto* g : {&lo[0], &lo[1], &up[0], &up[1]})
    for (const auto& [m, a] : g->terms())
      for (int v = 0; v < n; ++v) bound = std::max(bound, abs(a[v]));
  bound *= 16;

  GroupElement fixed_part(n, fixed);
  for (int refine = 0; refine <= opt.lp_refinements; ++refine) {
    tr.retries = refine;
    tr.lp_samples = static_cast<int>(samples.size());
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    // sign * (g - other)(v, t) * scale >= s, with g = fixed + free part.
    auto relation = [&](int r, const Rational& t, int v, bool at_one_sum) {
      const GroupElement& other = r < 2 ? lo[r] : up[r - 2];
      const int sign = r < 2 ? 1 : -1;
      Rational scale = unbounded ? pow(t, -lead[r]) : Rational(1);
      std::vector<Rational> row(nv);
      Rational rest = (fixed_part - other).vertex_poly(v)(t);
      if (at_one_sum) rest = (fixed_part - other).coefficient_sum()[v];
      for (int ki = 0; ki < per; ++ki) row[var(ki, v)] = -sign * scale * pow(t, exps[ki]);
      row[slack] = 1;
      a.push_back(std::move(row));
      b.push_back(sign * scale * rest);
    };
    for (const auto& t : samples)
      for (int r = 0; r < 4; ++r)
        for (int v : fv) relation(r, t, v, false);
    for (int r = 0; r < 4; ++r)
      for (int w : sc.face().complement()) relation(r, 1, w, true);
    if (unbounded) {
      // Leading coefficient at e0 strictly between the live inputs, on all of Delta.
      auto it = std::find(exps.begin(), exps.end(), *e0);
      for (int v = 0; v < n; ++v) {
        for (int i : live_lo) {
          std::vector<Rational> row(nv);
          if (it != exps.end()) row[var(static_cast<int>(it - exps.begin()), v)] = -1;
          row[slack] = 1;
          a.push_back(std::move(row));
          b.push_back(-lo[i].coeff(*e0)[v]);
        }
        for (int j : live_up) {
          std::vector<Rational> row(nv);
          if (it != exps.end()) row[var(static_cast<int>(it - exps.begin()), v)] = 1;
          row[slack] = 1;
          a.push_back(std::move(row));
          b.push_back(up[j].coeff(*e0)[v]);
        }
      }
    }
    for (int k = 0; k < slack; ++k)
      for (int sg : {1, -1}) {
        std::vector<Rational> row(nv);
        row[k] = sg;
        a.push_back(std::move(row));
        b.push_back(bound);
      }
    {
      std::vector<Rational> row(nv);
      row[slack] = 1;
      a.push_back(std::move(row));
      b.push_back(1);
    }
    std::vector<Rational> obj(nv);
    obj[slack] = 1;
    // Search in floating point; an infeasibility verdict is only trusted from
    // the exact solver.
    std::vector<Rational> x;
    {
      std::vector<std::vector<long double>> fa(a.size(), std::vector<long double>(nv));
      std::vector<long double> fb(b.size()), fobj(nv);
      for (std::size_t i = 0; i < a.size(); ++i) {
        for (int k = 0; k < nv; ++k) fa[i][k] = detail::ld(a[i][k]);
        fb[i] = detail::ld(b[i]);
      }
      fobj[slack] = 1;
      auto fsol = lp::maximize_approx(std::move(fa), std::move(fb), std::move(fobj));
      if (fsol.status == lp::Status::Optimal && fsol.x[slack] > 1e-9L)
        for (auto v : fsol.x) x.push_back(detail::snap_value(v));
    }
    if (x.empty()) {
      lp::Solution sol = lp::maximize(a, b, obj);
      if (sol.status != lp::Status::Optimal || sol.x[slack] <= 0) {
        if (trace) *trace = tr;
        throw Infeasible(window);
      }
      x = sol.x;
    }
    GroupElement g = fixed_part;
    for (int ki = 0; ki < per; ++ki) {
      AffineElement c = AffineElement::zero(n);
      for (int v = 0; v < n; ++v) c[v] = x[var(ki, v)];
      g += GroupElement::at(exps[ki], c);
    }
    std::optional<PositivityWitness> w;
    if (detail::verify_between(lo, up, g, sc, &w)) {
      if (trace) *trace = tr;
      return g;
    }
    std::size_t before = samples.size();
    detail::add_witness(samples, w);
    if (samples.size() == before) break;
  }
  throw RetriesExhausted("LP candidate did not certify", tr);
}

// The LP oracle over windows grown around the inputs until one is feasible.
inline GroupElement interpolate_lp(const InterpolationProblem& p, InterpolationTrace* trace = nullptr,
                                   const RieszOptions& opt = {}) {
  auto [lo, hi] = detail::exponent_hull({&p.lowers[0], &p.lowers[1], &p.uppers[0], &p.uppers[1]});
  ExponentWindow w{std::min(lo, 0), std::max(hi, 0)};
  if (p.scenario.mode() == Mode::Unbounded) w.lo -= 1;
  for (int widen = 0;; ++widen) {
    try {
      return interpolate_lp(p, w, trace, opt);
    } catch (const Infeasible&) {
      if (w.hi - w.lo + 1 >= opt.max_terms / 2) throw;
    }
    w.lo -= 2;
    if (p.scenario.mode() == Mode::Compact) w.hi += 2;
  }
}

}  // namespace kmsflow
