#pragma once

#include <optional>
#include <vector>

#include "kmsflow/dimgroup.hpp"
#include "kmsflow/lp.hpp"

namespace kmsflow {

// phi(g) = sum_m g_m(y) s^m for a base point y in barycentric coordinates.
// Weights are not forced to be normalised, so a corrupted functional can be
// represented and rejected by eigen_verify.
struct KmsFunctional {
  std::vector<Rational> base_point;
  Rational s;
};

inline Rational kms_eval(const KmsFunctional& f, const GroupElement& g) {
  if (static_cast<int>(f.base_point.size()) != g.vertex_count()) throw DimensionMismatch("base point dimension");
  if (f.s <= 0) throw InvalidArgument("s must be positive");
  Rational acc = 0;
  for (const auto& [m, a] : g.terms()) {
    Rational y = 0;
    for (int v = 0; v < a.size(); ++v) y += f.base_point[v] * a[v];
    acc += y * pow(f.s, m);
  }
  return acc;
}

inline bool eigen_verify(const KmsFunctional& f, const std::vector<GroupElement>& gens) {
  int n = static_cast<int>(f.base_point.size());
  if (kms_eval(f, GroupElement::unit(n)) != 1) return false;
  for (const auto& g : gens)
    if (kms_eval(f, shift(g, 1)) != kms_eval(f, g) / f.s) return false;
  return true;
}

enum class ParamSpace { FaceParam, SimplexParam };

struct ComponentCheck {
  Rational lo;
  std::optional<Rational> hi;
  Rational value_lo;
  std::optional<Rational> value_hi;
  int sturm_roots = 0;               // distinct roots of p in (lo, hi] (or (lo, B] on a ray)
  std::optional<Rational> cauchy_bound;
};

struct CertificateTranscript {
  std::vector<ComponentCheck> components;
  Rational value_at_one;
  Rational value_at_s;
};

struct SpectrumVerdict {
  bool exists = false;
  ParamSpace space = ParamSpace::FaceParam;
  std::optional<KmsFunctional> sample;
  LaurentPoly certificate;
  CertificateTranscript transcript;
};

class CertificateSearchFailed : public Error {
 public:
  explicit CertificateSearchFailed(int max_terms)
      : Error("no nonexistence certificate within " + std::to_string(max_terms) + " monomials"), max_terms_(max_terms) {}
  int max_degree() const { return max_terms_; }

 private:
  int max_terms_;
};

// Endpoint values and Sturm counts that let a reader re-check a certificate by hand.
inline CertificateTranscript certificate_transcript(const LaurentPoly& p, const Rational& s, const AdmissibleSet& l) {
  CertificateTranscript tr;
  auto [poly, e] = p.cleared();
  for (const auto& c : l.components()) {
    ComponentCheck cc;
    cc.lo = c.lo;
    cc.hi = c.hi;
    cc.value_lo = p(c.lo);
    if (c.hi) {
      cc.value_hi = p(*c.hi);
      if (!c.is_point() && poly.degree() > 0) cc.sturm_roots = SturmSequence(poly).count_roots(c.lo, *c.hi);
    } else if (poly.degree() > 0) {
      Rational b = std::max(cauchy_bound(poly), c.lo);
      cc.cauchy_bound = b;
      cc.sturm_roots = SturmSequence(poly).count_roots(c.lo, b);
    }
    tr.components.push_back(cc);
  }
  tr.value_at_one = p(1);
  tr.value_at_s = p(s);
  return tr;
}

// Independent re-check: positivity on L (and at 1), a negative value at s, and in
// the unbounded case a positive leading coefficient.
inline bool verify_certificate(const LaurentPoly& p, const Rational& s, const AdmissibleSet& l) {
  if (p.is_zero() || p(s) >= 0 || p(1) <= 0) return false;
  if (!l.is_compact() && p.leading() <= 0) return false;
  return sturm_positive_on(p, l).positive;
}

struct CertificateOptions {
  int max_terms = 64;
  int refinements = 24;
};

inline LaurentPoly nonexistence_certificate(const Rational& s, const Scenario& sc, const CertificateOptions& opt = {}) {
  const AdmissibleSet& l = sc.L();
  if (s <= 0) throw InvalidArgument("s must be positive");
  if (l.contains(s)) throw InvalidArgument("s lies in L; no certificate exists");
  const bool unbounded = sc.mode() == Mode::Unbounded;

  for (int d = 1; d + 1 <= opt.max_terms; ++d) {
    std::vector<Rational> samples;
    for (const auto& c : l.components()) {
      if (c.is_point()) {
        samples.push_back(c.lo);
      } else if (c.hi) {
        int k = 4 * (d + 1) + 4;
        for (int i = 0; i <= k; ++i) {
          long double x = (1 - std::cos(static_cast<long double>(M_PI) * i / k)) / 2;
          samples.push_back(c.lo + (*c.hi - c.lo) * simplest_between(from_double(static_cast<double>(x) - 1e-6),
                                                                      from_double(static_cast<double>(x) + 1e-6)));
        }
      } else {
        for (int i = 0; i <= 8; ++i) samples.push_back(c.lo + c.lo * ratio(i, 4));
        for (int j = 2; j <= 12; ++j) samples.push_back(c.lo * (Integer(1) << j));
      }
    }
    samples.push_back(1);
    for (int round = 0; round < opt.refinements; ++round) {
      // variables c_0..c_d, sigma
      std::vector<std::vector<Rational>> a;
      std::vector<Rational> b;
      auto weight = [&](const Rational& t) { return pow(std::max(Rational(1), t), d); };
      for (const auto& t : samples) {
        std::vector<Rational> row(d + 2);
        Rational tk = 1;
        for (int k = 0; k <= d; ++k, tk *= t) row[k] = -tk;
        row[d + 1] = weight(t);
        a.push_back(row);
        b.push_back(0);
      }
      {
        std::vector<Rational> row(d + 2);
        Rational sk = 1;
        for (int k = 0; k <= d; ++k, sk *= s) row[k] = sk;
        row[d + 1] = weight(s);
        a.push_back(row);
        b.push_back(0);
      }
      for (int k = 0; k <= d; ++k)
        for (int sg : {1, -1}) {
          std::vector<Rational> row(d + 2);
          row[k] = sg;
          a.push_back(row);
          b.push_back(1);
        }
      {
        std::vector<Rational> row(d + 2);
        row[d + 1] = 1;
        a.push_back(row);
        b.push_back(1);
      }
      if (unbounded) {
        std::vector<Rational> row(d + 2);
        row[d] = -1;
        row[d + 1] = 1;
        a.push_back(row);
        b.push_back(0);
      }
      std::vector<Rational> obj(d + 2);
      obj[d + 1] = 1;
      lp::Solution sol = lp::maximize(a, b, obj);
      if (sol.status != lp::Status::Optimal || sol.x[d + 1] <= 0) break;
      std::map<int, Rational> terms;
      for (int k = 0; k <= d; ++k) terms[k] = sol.x[k];
      LaurentPoly p(terms);
      PositivityResult pos = sturm_positive_on(p, l);
      if (pos.positive && verify_certificate(p, s, l)) return p;
      if (!pos.witness) break;
      if (pos.witness->bracket) {
        samples.push_back(pos.witness->bracket->lo);
        samples.push_back(pos.witness->bracket->hi);
      }
      samples.push_back(pos.witness->point);
    }
  }
  throw CertificateSearchFailed(opt.max_terms);
}

inline std::vector<GroupElement> generator_battery(int n) {
  std::vector<GroupElement> gens{GroupElement::unit(n)};
  for (int v = 0; v < n; ++v) {
    AffineElement e = AffineElement::zero(n);
    e[v] = 1;
    for (auto [k, l] : std::vector<std::pair<int, int>>{{1, 0}, {-1, 0}, {2, -3}, {3, 1}})
      gens.push_back(GroupElement::at(k, e) - GroupElement::at(l, e));
  }
  return gens;
}

inline SpectrumVerdict spectrum_query(const Rational& s, const Scenario& sc, const CertificateOptions& opt = {}) {
  if (s <= 0) throw InvalidArgument("s must be positive");
  SpectrumVerdict out;
  const int n = sc.vertex_count();
  if (sc.L().contains(s)) {
    out.exists = true;
    out.space = s == 1 ? ParamSpace::SimplexParam : ParamSpace::FaceParam;
    // Barycentre of Delta for s = 1, of F otherwise.
    std::vector<Rational> y(n, 0);
    if (s == 1) {
      for (auto& w : y) w = ratio(1, n);
    } else {
      const auto& fv = sc.face().vertices();
      for (int v : fv) y[v] = ratio(1, static_cast<long>(fv.size()));
    }
    out.sample = KmsFunctional{y, s};
    if (!eigen_verify(*out.sample, generator_battery(n))) throw InternalError("sample functional failed eigen_verify");
    return out;
  }
  out.exists = false;
  out.certificate = nonexistence_certificate(s, sc, opt);
  out.transcript = certificate_transcript(out.certificate, s, sc.L());
  return out;
}

// A positive element whose value under the (x0, s) functional is negative.
inline GroupElement face_separation_witness(int x0, const Rational& s, const Scenario& sc) {
  const Face& f = sc.face();
  if (x0 < 0 || x0 >= sc.vertex_count()) throw InvalidArgument("x0 out of range");
  if (f.contains(x0)) throw InvalidArgument("x0 must lie outside the face");
  if (!sc.L().contains(s) || s == 1) throw InvalidArgument("s must lie in L and differ from 1");
  const int n = sc.vertex_count();
  LaurentPoly bump = LaurentPoly::monomial(2, 1) - LaurentPoly::monomial(1, 2) + LaurentPoly::constant(1);
  if (sc.mode() == Mode::Unbounded) bump = bump.shifted(-4);
  const Rational eta = ratio(1, 2);
  std::vector<Rational> zeros(f.vertices().size(), 0);
  KmsFunctional at_x0{std::vector<Rational>(n, 0), s};
  at_x0.base_point[x0] = 1;
  for (Rational beta = 2; beta < Rational(Integer(1) << 64); beta *= 2) {
    AffineElement b = -extend_from_face(zeros, f, x0, beta);
    GroupElement g = bump * GroupElement::at(0, b) + GroupElement::unit(n) * eta;
    if (kms_eval(at_x0, g) >= 0) continue;
    if (!order_test(g, sc).positive()) throw InternalError("face separation element is not positive");
    return g;
  }
  throw InternalError("face separation search exceeded its cap");
}

}  // namespace kmsflow
