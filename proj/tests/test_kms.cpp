#include <gtest/gtest.h>

#include "kmsflow/kms.hpp"
#include "support.hpp"

using namespace kmsflow;
using testing_support::poly;
using testing_support::Q;
using testing_support::Rng;

namespace {

Scenario compact(int n, std::vector<int> face, AdmissibleSet l) {
  Simplex s(n);
  return Scenario(s, Face(s, std::move(face)), std::move(l), Mode::Compact);
}
Scenario unbounded(int n, std::vector<int> face, AdmissibleSet l) {
  Simplex s(n);
  return Scenario(s, Face(s, std::move(face)), std::move(l), Mode::Unbounded);
}
Scenario half_two() { return compact(1, {0}, AdmissibleSet::interval(Q("1/2"), Q("2"))); }

// Independent check of a certificate: Sturm positivity plus substitution at s.
void expect_valid_certificate(const LaurentPoly& p, const Rational& s, const Scenario& sc) {
  EXPECT_LT(p(s), 0);
  EXPECT_TRUE(sturm_positive_on(p, sc.L()).positive);
  if (sc.mode() == Mode::Unbounded) EXPECT_GT(p.leading(), 0);
}

}  // namespace

GTEST_TEST(KmsEval, Examples) {
  KmsFunctional f{{Q("1")}, Q("2")};
  EXPECT_EQ(kms_eval(f, GroupElement::from_laurent(1, poly({{1, "1"}, {0, "1"}}))), 3);
  EXPECT_EQ(kms_eval(f, GroupElement::unit(1)), 1);
  AffineElement h({Q("5/2")});
  GroupElement g = GroupElement::at(3, h) - GroupElement::at(-1, h);
  EXPECT_EQ(kms_eval(f, g), Q("5/2") * (Q("8") - Q("1/2")));
}

GTEST_TEST(EigenVerify, Examples) {
  GroupElement g = GroupElement::from_laurent(1, poly({{1, "1"}, {0, "1"}}));
  EXPECT_TRUE(eigen_verify({{Q("1")}, Q("2")}, {g}));
  EXPECT_TRUE(eigen_verify({{Q("1/3"), Q("2/3")}, Q("1")}, generator_battery(2)));
  EXPECT_FALSE(eigen_verify({{Q("1/2"), Q("1/3")}, Q("2")}, {g}));
}

GTEST_TEST(Spectrum, CompactExamples) {
  auto sc = half_two();
  auto v3 = spectrum_query(Q("3"), sc);
  ASSERT_FALSE(v3.exists);
  expect_valid_certificate(v3.certificate, Q("3"), sc);
  // The hand certificate from the documentation is valid as well.
  expect_valid_certificate(poly({{0, "5/2"}, {1, "-1"}}), Q("3"), sc);

  auto v1 = spectrum_query(Q("1"), sc);
  EXPECT_TRUE(v1.exists);
  EXPECT_EQ(v1.space, ParamSpace::SimplexParam);
  auto v2 = spectrum_query(Q("2"), sc);
  EXPECT_TRUE(v2.exists);
  EXPECT_EQ(v2.space, ParamSpace::FaceParam);
}

GTEST_TEST(Spectrum, PointAndRayExamples) {
  auto only_one = compact(1, {0}, AdmissibleSet({}, {Q("1")}));
  auto c = nonexistence_certificate(Q("2"), only_one);
  expect_valid_certificate(c, Q("2"), only_one);
  expect_valid_certificate(poly({{0, "3"}, {1, "-2"}}), Q("2"), only_one);

  auto ray = unbounded(1, {0}, AdmissibleSet({}, {}, Q("1")));
  auto c2 = nonexistence_certificate(Q("1/2"), ray);
  expect_valid_certificate(c2, Q("1/2"), ray);
  expect_valid_certificate(poly({{1, "1"}, {0, "-3/4"}}), Q("1/2"), ray);

  auto gap = unbounded(1, {0}, AdmissibleSet({}, {Q("1")}, Q("2")));
  auto v = spectrum_query(Q("3/2"), gap);
  ASSERT_FALSE(v.exists);
  expect_valid_certificate(v.certificate, Q("3/2"), gap);
  EXPECT_LT(v.transcript.value_at_s, 0);
}

GTEST_TEST(Spectrum, SweepMatchesMembership) {
  auto sc = half_two();
  std::vector<bool> expected{false, true, true, true, false};
  std::vector<Rational> ss{Q("1/4"), Q("1/2"), Q("1"), Q("2"), Q("3")};
  for (std::size_t i = 0; i < ss.size(); ++i) EXPECT_EQ(spectrum_query(ss[i], sc).exists, expected[i]);
}

GTEST_TEST(Spectrum, CertificateAcrossGaps) {
  auto sc = unbounded(2, {0}, AdmissibleSet({{Q("1"), Q("2")}}, {Q("3")}, Q("5")));
  for (Rational s : {Q("1/3"), Q("21/10"), Q("5/2"), Q("299/100"), Q("4"), Q("49/10")}) {
    auto v = spectrum_query(s, sc);
    ASSERT_FALSE(v.exists) << s;
    expect_valid_certificate(v.certificate, s, sc);
  }
}

GTEST_TEST(FaceSeparation, Examples) {
  auto sc = compact(2, {0}, AdmissibleSet::interval(Q("1/2"), Q("2")));
  KmsFunctional at_x0{{Q("0"), Q("1")}, Q("2")};
  GroupElement g = face_separation_witness(1, Q("2"), sc);
  EXPECT_TRUE(order_test(g, sc).positive());
  EXPECT_EQ(kms_eval(at_x0, g), Q("-3/2"));

  at_x0.s = Q("3/2");
  GroupElement g2 = face_separation_witness(1, Q("3/2"), sc);
  EXPECT_EQ(kms_eval(at_x0, g2), Q("-1/2"));

  auto usc = unbounded(2, {0}, AdmissibleSet({}, {Q("1")}, Q("2")));
  at_x0.s = Q("2");
  GroupElement g3 = face_separation_witness(1, Q("2"), usc);
  EXPECT_EQ(kms_eval(at_x0, g3), Q("-1/2"));
  EXPECT_EQ(*degree_and_leading(g3).degree, 0);
  EXPECT_EQ(degree_and_leading(g3).leading->values()[0], Q("1/2"));
  EXPECT_TRUE(order_test(g3, usc).positive());

  EXPECT_THROW(face_separation_witness(0, Q("2"), sc), InvalidArgument);
  EXPECT_THROW(face_separation_witness(1, Q("1"), sc), InvalidArgument);
}

GTEST_TEST(KmsFunctionals, PositiveOnPositiveElements) {
  Rng rng(41);
  Simplex s(3);
  Scenario sc(s, Face(s, {0, 1}), AdmissibleSet({{Q("1/2"), Q("2")}}, {Q("3")}), Mode::Compact);
  int tested = 0;
  for (int i = 0; i < 1000 && tested < 100; ++i) {
    std::map<int, AffineElement> t;
    for (int k = 0; k < 3; ++k) {
      std::vector<Rational> v(3);
      for (auto& q : v) q = rng.small_rational(3, 2);
      t.try_emplace(rng.integer(-2, 2), AffineElement::zero(3)).first->second += AffineElement(v);
    }
    GroupElement g = GroupElement(3, t) + GroupElement::unit(3) * Rational(rng.integer(1, 6));
    if (!order_test(g, sc).positive()) continue;
    ++tested;
    Rational sv = rng.coin() ? Q("3") : rng.rational(Q("1/2"), Q("2"), 16);
    Rational w = rng.rational(0, 1, 12);
    KmsFunctional f{{w, 1 - w, 0}, sv};
    EXPECT_GT(kms_eval(f, g), 0);
  }
  EXPECT_EQ(tested, 100);
}

GTEST_TEST(KmsFunctionals, SampleFunctionalsPassBattery) {
  Rng rng(43);
  Scenario sc(Simplex(3), Face(Simplex(3), {2}), AdmissibleSet({{Q("1/2"), Q("2")}}, {Q("4")}), Mode::Compact);
  for (Rational s : {Q("1/2"), Q("1"), Q("3/2"), Q("4")}) {
    auto v = spectrum_query(s, sc);
    ASSERT_TRUE(v.exists);
    auto gens = generator_battery(3);
    for (int i = 0; i < 10; ++i) {
      std::map<int, AffineElement> t;
      t.emplace(rng.integer(-3, 3), AffineElement({rng.small_rational(), rng.small_rational(), rng.small_rational()}));
      gens.push_back(GroupElement(3, t));
    }
    EXPECT_TRUE(eigen_verify(*v.sample, gens));
  }
}
