#include <gtest/gtest.h>

#include "kmsflow/approx.hpp"
#include "kmsflow/laurent.hpp"
#include "kmsflow/positivity.hpp"
#include "support.hpp"

using namespace kmsflow;
using testing_support::poly;
using testing_support::Q;
using testing_support::Rng;

namespace {

AdmissibleSet compact_half_two() { return AdmissibleSet::interval(Q("1/2"), Q("2")); }
AdmissibleSet one_and_ray() { return AdmissibleSet({}, {Q("1")}, Q("2")); }

LaurentPoly random_poly(Rng& rng, int lo = -3, int hi = 3, int terms = 4) {
  std::map<int, Rational> m;
  for (int i = 0; i < terms; ++i) m[rng.integer(lo, hi)] += rng.small_rational(6, 3);
  return LaurentPoly(m);
}

std::vector<AdmissibleSet> random_sets() {
  return {compact_half_two(),
          AdmissibleSet({{Q("1/2"), Q("2")}}, {Q("4")}),
          AdmissibleSet({{Q("1"), Q("2")}}, {Q("3")}, Q("5")),
          one_and_ray(),
          AdmissibleSet({{Q("1/3"), Q("3/2")}, {Q("5/2"), Q("3")}})};
}

}  // namespace

GTEST_TEST(LaurentArithmetic, NoStoredZeros) {
  LaurentPoly p = poly({{1, "1"}, {0, "1"}});
  LaurentPoly q = poly({{1, "-1"}});
  EXPECT_EQ((p + q).terms().size(), 1u);
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ((p * p)(Q("2")), Q("9"));
  EXPECT_EQ(p.shifted(-1), poly({{0, "1"}, {-1, "1"}}));
  EXPECT_EQ(poly({{-2, "3"}, {1, "1"}})(Q("1/2")), Q("12") + Q("1/2"));
}

GTEST_TEST(AdmissibleSetNormalisation, MergesAndValidates) {
  AdmissibleSet s({{Q("1"), Q("2")}, {Q("3/2"), Q("3")}}, {Q("2"), Q("5")}, Q("4"));
  ASSERT_EQ(s.components().size(), 2u);
  EXPECT_EQ(s.components()[0].lo, Q("1"));
  EXPECT_EQ(*s.components()[0].hi, Q("3"));
  EXPECT_TRUE(s.components()[1].is_ray());
  EXPECT_EQ(s.components()[1].lo, Q("4"));
  EXPECT_THROW(AdmissibleSet({{Q("2"), Q("3")}}), InvalidArgument);        // misses 1
  EXPECT_THROW(AdmissibleSet({{Q("0"), Q("3")}}), InvalidArgument);        // touches 0
  EXPECT_THROW(AdmissibleSet({{Q("3"), Q("1")}}), InvalidArgument);        // reversed
}

GTEST_TEST(SturmPositive, WorkedExamples) {
  auto r1 = sturm_positive_on(poly({{1, "1"}, {0, "1"}}), compact_half_two());
  EXPECT_TRUE(r1.positive);

  auto r2 = sturm_positive_on(poly({{0, "2"}, {1, "-1"}}), compact_half_two());
  ASSERT_FALSE(r2.positive);
  EXPECT_EQ(r2.witness->point, Q("2"));
  EXPECT_EQ(r2.witness->value, Q("0"));

  auto r3 = sturm_positive_on(poly({{1, "1"}, {0, "-3"}}), one_and_ray());
  ASSERT_FALSE(r3.positive);
  EXPECT_EQ(r3.witness->point, Q("1"));
  EXPECT_EQ(r3.witness->value, Q("-2"));
}

GTEST_TEST(SturmPositive, ZeroPolynomialIsNotPositive) {
  auto r = sturm_positive_on(LaurentPoly(), compact_half_two());
  EXPECT_FALSE(r.positive);
  EXPECT_EQ(r.witness->value, 0);
}

GTEST_TEST(SturmPositive, InteriorDoubleRoots) {
  // Rational double root in the interior: endpoint and midpoint values are positive.
  auto r = sturm_positive_on(poly({{2, "9"}, {1, "-6"}, {0, "1"}}), AdmissibleSet::interval(Q("1/10"), Q("7/5")));
  ASSERT_FALSE(r.positive);
  EXPECT_EQ(r.witness->point, Q("1/3"));
  EXPECT_EQ(r.witness->value, 0);

  // (t^2 - 2)^2 touches zero at sqrt 2, which no rational hits.
  auto s = sturm_positive_on(poly({{4, "1"}, {2, "-4"}, {0, "4"}}), AdmissibleSet::interval(Q("1"), Q("2")));
  ASSERT_FALSE(s.positive);
  ASSERT_TRUE(s.witness->bracket.has_value());
  const auto& b = *s.witness->bracket;
  EXPECT_LT(b.lo * b.lo, 2);
  EXPECT_GT(b.hi * b.hi, 2);

  // Slightly lifted, it is positive.
  EXPECT_TRUE(sturm_positive_on(poly({{4, "1"}, {2, "-4"}, {0, "4001/1000"}}), AdmissibleSet::interval(Q("1"), Q("2"))));
}

GTEST_TEST(SturmPositive, RayUsesLeadingSign) {
  AdmissibleSet s({}, {Q("1")}, Q("2"));
  EXPECT_TRUE(sturm_positive_on(poly({{2, "1"}, {1, "-5"}, {0, "7"}}), s));  // min 3/4 at 5/2
  auto r = sturm_positive_on(poly({{2, "-1"}, {1, "10"}}), s);
  ASSERT_FALSE(r.positive);
  EXPECT_LE(r.witness->value, 0);
  EXPECT_GE(r.witness->point, 2);
  EXPECT_EQ(poly({{2, "-1"}, {1, "10"}})(r.witness->point), r.witness->value);
}

GTEST_TEST(SturmCount, MatchesKnownRoots) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    // Product of linear factors with known rational roots in (0, 4).
    std::vector<Rational> roots;
    Polynomial p = Polynomial::constant(1);
    int k = rng.integer(1, 5);
    for (int i = 0; i < k; ++i) {
      Rational r = rng.rational(Q("1/8"), Q("4"), 40);
      roots.push_back(r);
      p = p * Polynomial({-r, 1});
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    Rational a = rng.rational(0, 2, 37), b = a + rng.rational(0, 2, 37);
    int expected = 0;
    for (const auto& r : roots)
      if (r > a && r <= b) ++expected;
    EXPECT_EQ(SturmSequence(p).count_roots(a, b), expected);
  }
}

// Positive verdicts never meet a counterexample; witnesses evaluate as claimed.
GTEST_TEST(SturmPositive, SoundAndCompleteOnRandomInputs) {
  Rng rng(2024);
  auto sets = random_sets();
  int positives = 0, witnesses = 0;
  for (int trial = 0; trial < 400; ++trial) {
    LaurentPoly p = random_poly(rng) + LaurentPoly::constant(rng.small_rational(8, 2));
    const auto& s = sets[trial % sets.size()];
    auto r = sturm_positive_on(p, s);
    if (r.positive) {
      ++positives;
      for (int i = 0; i < 25; ++i) {
        Rational t = testing_support::point_in(rng, s);
        ASSERT_GT(p(t), 0) << "t=" << t;
      }
    } else {
      ++witnesses;
      ASSERT_TRUE(r.witness.has_value());
      EXPECT_TRUE(s.contains(r.witness->point));
      EXPECT_EQ(p(r.witness->point), r.witness->value);
      if (!r.witness->bracket) EXPECT_LE(r.witness->value, 0);
    }
  }
  EXPECT_GT(positives, 40);
  EXPECT_GT(witnesses, 40);
}

GTEST_TEST(CertifiedMin, WorkedExamples) {
  auto m1 = certified_min(poly({{1, "1"}, {0, "1"}}), compact_half_two());
  EXPECT_GT(m1.bound, 0);
  EXPECT_LE(m1.bound, Q("3/2"));
  EXPECT_EQ(certified_min(LaurentPoly::constant(1), compact_half_two()).bound, 1);
  EXPECT_EQ(certified_min(LaurentPoly::constant(1), AdmissibleSet({}, {Q("1"), Q("3")})).bound, 1);
  auto m3 = certified_min(poly({{2, "1"}, {1, "-2"}, {0, "1"}}), compact_half_two());
  EXPECT_FALSE(m3.positive());
  ASSERT_TRUE(m3.witness.has_value());
  EXPECT_EQ(m3.witness->value, 0);
  EXPECT_THROW(certified_min(LaurentPoly::constant(1), one_and_ray()), InvalidArgument);
}

GTEST_TEST(CertifiedMin, LowerBoundHoldsAtRandomPoints) {
  Rng rng(99);
  std::vector<AdmissibleSet> sets{compact_half_two(), AdmissibleSet({{Q("1/2"), Q("2")}}, {Q("4")}),
                                  AdmissibleSet({{Q("1/3"), Q("3/2")}, {Q("5/2"), Q("3")}})};
  for (int trial = 0; trial < 60; ++trial) {
    LaurentPoly p = random_poly(rng);
    const auto& s = sets[trial % sets.size()];
    auto m = certified_min(p, s);
    for (int i = 0; i < 1000 / 60 + 1; ++i) {
      Rational t = testing_support::point_in(rng, s);
      ASSERT_GE(p(t), m.bound);
    }
    if (sturm_positive_on(p, s).positive) EXPECT_GT(m.bound, 0);
  }
}

GTEST_TEST(Approx, TargetsInSpanAreExact) {
  PiecewiseLinear c{{{Q("1/2"), Q("7/3")}, {Q("2"), Q("7/3")}}};
  auto r1 = approx_on(c, Q("1/100"), -2, 2, compact_half_two());
  EXPECT_EQ(r1.poly, LaurentPoly::constant(Q("7/3")));
  EXPECT_EQ(r1.error_bound, 0);

  PiecewiseLinear id{{{Q("1/2"), Q("1/2")}, {Q("2"), Q("2")}}};
  auto r2 = approx_on(id, Q("1/100"), 1, 1, compact_half_two());
  EXPECT_EQ(r2.poly, poly({{1, "1"}}));
  EXPECT_EQ(r2.error_bound, 0);
}

GTEST_TEST(Approx, HatFunctionWithinBound) {
  PiecewiseLinear hat{{{Q("1/2"), Q("0")}, {Q("1"), Q("1")}, {Q("2"), Q("0")}}};
  auto r = approx_on(hat, Q("1/4"), -6, 6, compact_half_two());
  EXPECT_LE(r.error_bound, Q("1/4"));
  // Independent dense sampling.
  for (int i = 0; i <= 600; ++i) {
    Rational t = Q("1/2") + Q("3/2") * ratio(i, 600);
    EXPECT_LE(abs(r.poly(t) - hat(t)), Q("1/4"));
  }
}

GTEST_TEST(Approx, RandomTargetsRespectClaimedBound) {
  Rng rng(8);
  AdmissibleSet s({{Q("1/2"), Q("2")}}, {Q("3")});
  for (int trial = 0; trial < 10; ++trial) {
    PiecewiseLinear f;
    for (Rational t : {Q("1/2"), Q("3/4"), Q("1"), Q("3/2"), Q("2"), Q("3")}) f.knots.push_back({t, rng.small_rational(3, 2)});
    Rational eps = Q("1/3");
    try {
      auto r = approx_on(f, eps, -4, 4, s);
      for (int i = 0; i < 300; ++i) {
        Rational t = testing_support::point_in(rng, s);
        ASSERT_LE(abs(r.poly(t) - f(t)), r.error_bound);
      }
    } catch (const ApproximationFailed& e) {
      EXPECT_GT(e.achieved_bound(), eps);
    }
  }
}

GTEST_TEST(Approx, NegativeWindowOnlyNegativePowers) {
  PiecewiseLinear f{{{Q("1"), Q("1")}, {Q("3"), Q("2")}}};
  ApproxOptions opt;
  opt.fix_top = true;
  auto r = approx_on(f, Q("1/20"), -8, -3, AdmissibleSet::interval(Q("1"), Q("3")), opt);
  EXPECT_LE(r.poly.max_exponent(), -3);
  EXPECT_LE(r.error_bound, Q("1/20"));
}

GTEST_TEST(VanishAtOne, ExamplesAndReconstruction) {
  using Basis = std::map<std::pair<int, int>, Rational>;
  EXPECT_EQ(vanish_at_one_basis(poly({{1, "1"}, {0, "-1"}})), (Basis{{{1, 0}, 1}}));
  EXPECT_EQ(vanish_at_one_basis(poly({{2, "1"}, {1, "-2"}, {0, "1"}})), (Basis{{{2, 0}, 1}, {{1, 0}, -2}}));
  EXPECT_TRUE(vanish_at_one_basis(LaurentPoly()).empty());
  EXPECT_THROW(vanish_at_one_basis(poly({{1, "1"}})), InvalidArgument);

  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    LaurentPoly f = random_poly(rng, -5, 5, 5);
    f -= LaurentPoly::constant(f.coefficient_sum());
    LaurentPoly rebuilt;
    for (const auto& [kl, c] : vanish_at_one_basis(f))
      rebuilt += (LaurentPoly::monomial(kl.first, 1) - LaurentPoly::monomial(kl.second, 1)) * c;
    EXPECT_EQ(rebuilt, f);
  }
}
