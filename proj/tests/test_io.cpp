#include <gtest/gtest.h>

#include "kmsflow/io.hpp"
#include "support.hpp"

using namespace kmsflow;
using io::Json;
using testing_support::poly;
using testing_support::Q;
using testing_support::Rng;

namespace {

// Message of the ParseError thrown by f, or "" if none.
template <class F>
std::string parse_error_of(F f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

io::ScenarioFile scenario_text(const std::string& text) { return io::scenario_from(io::parse(text)); }

}  // namespace

GTEST_TEST(IoRational, AcceptsStringsAndIntegers) {
  EXPECT_EQ(io::rational_from(Json("3/6"), "x"), Q("1/2"));
  EXPECT_EQ(io::rational_from(Json("-7"), "x"), -7);
  EXPECT_EQ(io::rational_from(Json(12), "x"), 12);
  EXPECT_EQ(io::rational_from(Json("123456789012345678901234567890/7"), "x"), Q("123456789012345678901234567890/7"));
  EXPECT_EQ(io::rational_from(Json::parse("-9223372036854775807"), "x"), Q("-9223372036854775807"));
  // past 64 bits the JSON layer has already rounded to a double
  EXPECT_NE(parse_error_of([] { io::rational_from(Json::parse("123456789012345678901234567890"), "x"); }).find("oversized"),
            std::string::npos);
}

GTEST_TEST(IoRational, ZeroDenominatorIsAParseError) {
  std::string m = parse_error_of([] { io::rational_from(Json("1/0"), "elements[2].element.0[1]"); });
  EXPECT_NE(m.find("elements[2].element.0[1]"), std::string::npos) << m;
  EXPECT_NE(m.find("1/0"), std::string::npos) << m;
}

GTEST_TEST(IoRational, RejectsDecimalsAndJunk) {
  EXPECT_NE(parse_error_of([] { io::rational_from(Json(0.5), "x"); }).find("decimal"), std::string::npos);
  EXPECT_FALSE(parse_error_of([] { io::rational_from(Json("0.5"), "x"); }).empty());
  EXPECT_FALSE(parse_error_of([] { io::rational_from(Json("1/2/3"), "x"); }).empty());
  EXPECT_FALSE(parse_error_of([] { io::rational_from(Json(true), "x"); }).empty());
}

GTEST_TEST(IoParse, SyntaxErrorsCarryLineAndColumn) {
  try {
    io::parse("{\n  \"a\": [1,\n  ]\n}", "f.json");
    FAIL() << "no error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 3u);
    EXPECT_EQ(std::string(e.what()).rfind("f.json:3:3:", 0), 0u) << e.what();
  }
}

GTEST_TEST(IoGroup, ExampleLayout) {
  GroupElement g = io::group_from(Json::parse(R"({"1": ["1", "2"], "-2": ["1/3", 0]})"), 2, "g");
  EXPECT_EQ(g.coeff(1), AffineElement({Q("1"), Q("2")}));
  EXPECT_EQ(g.coeff(-2), AffineElement({Q("1/3"), Q("0")}));
  EXPECT_EQ(io::to_json(g).dump(), R"({"1":["1","2"],"-2":["1/3","0"]})");
}

GTEST_TEST(IoGroup, BadShapesNamed) {
  EXPECT_NE(parse_error_of([] { io::group_from(Json::parse(R"({"1": ["1"]})"), 2, "g"); }).find("g.1: expected 2 vertex values"),
            std::string::npos);
  EXPECT_NE(parse_error_of([] { io::group_from(Json::parse(R"({"x": ["1"]})"), 1, "g"); }).find("exponent 'x'"),
            std::string::npos);
  EXPECT_NE(parse_error_of([] { io::group_from(Json::parse(R"({"1.5": ["1"]})"), 1, "g"); }).find("exponent"),
            std::string::npos);
  EXPECT_FALSE(parse_error_of([] { io::group_from(Json::parse("[1]"), 1, "g"); }).empty());
}

GTEST_TEST(IoScenario, ValidFile) {
  io::ScenarioFile f = scenario_text(R"({"simplex_vertices": 3, "face": [2, 0],
    "L": {"intervals": [["1/2", "2"]], "points": ["4"]}, "mode": "compact", "seed": 9, "caps": {"max_degree": 20}})");
  EXPECT_EQ(f.scenario.vertex_count(), 3);
  EXPECT_EQ(f.scenario.face().vertices(), (std::vector<int>{0, 2}));
  EXPECT_TRUE(f.scenario.L().contains(Q("4")));
  EXPECT_FALSE(f.scenario.L().contains(Q("3")));
  EXPECT_EQ(f.seed, 9u);
  EXPECT_EQ(f.max_degree, 20);
  EXPECT_EQ(f.max_retries, 6);
}

GTEST_TEST(IoScenario, InvariantViolationsNamed) {
  auto err = [](const std::string& text) { return parse_error_of([&] { scenario_text(text); }); };
  EXPECT_NE(err(R"({"simplex_vertices": 2, "face": [0], "L": {"intervals": [["2", "3"]]}, "mode": "compact"})").find("contain 1"),
            std::string::npos);
  EXPECT_NE(err(R"({"simplex_vertices": 2, "face": [0], "L": {"intervals": [["1", "2"]]}, "mode": "unbounded"})").find("ray"),
            std::string::npos);
  EXPECT_NE(err(R"({"simplex_vertices": 2, "face": [0], "L": {"ray_from": "1"}, "mode": "compact"})").find("ray"),
            std::string::npos);
  EXPECT_NE(err(R"({"simplex_vertices": 2, "face": [5], "L": {"points": ["1"]}, "mode": "compact"})"), "");
  EXPECT_NE(err(R"({"simplex_vertices": 2, "face": [], "L": {"points": ["1"]}, "mode": "compact"})"), "");
  EXPECT_NE(err(R"({"simplex_vertices": 2, "face": [0], "L": {"points": ["1"]}, "mode": "open"})").find("mode"),
            std::string::npos);
  EXPECT_NE(err(R"({"face": [0], "L": {"points": ["1"]}, "mode": "compact"})").find("missing field 'simplex_vertices'"),
            std::string::npos);
  EXPECT_NE(err(R"({"simplex_vertices": 1, "face": [0], "L": {"intervals": [["2", "1"]], "points": ["1"]}, "mode": "compact"})"),
            "");
  EXPECT_NE(err(R"({"simplex_vertices": 1, "face": [0], "L": {"points": ["-1", "1"]}, "mode": "compact"})"), "");
}

GTEST_TEST(IoDigest, StableAndSensitive) {
  Json a = Json::parse(R"({"x": "1/2"})");
  Json b = Json::parse(R"({"x": "1/3"})");
  EXPECT_EQ(io::digest(a), io::digest(Json::parse(R"({"x":"1/2"})")));
  EXPECT_NE(io::digest(a), io::digest(b));
  // FNV-1a 64 of "{}" from the published offset basis and prime
  EXPECT_EQ(io::digest(Json::object()), "fnv1a64:9bf65e00c699fdaf");
}

GTEST_TEST(IoProperty, RoundTrips) {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    Mode mode = rng.coin() ? Mode::Compact : Mode::Unbounded;
    Scenario sc = testing_support::random_scenario(rng, mode);
    io::ScenarioFile f{sc, static_cast<std::uint64_t>(rng.integer(0, 1 << 30)), rng.integer(2, 90), rng.integer(0, 9)};
    io::ScenarioFile back = scenario_text(io::to_json(f).dump());
    EXPECT_EQ(back.scenario.vertex_count(), sc.vertex_count());
    EXPECT_EQ(back.scenario.face(), sc.face());
    EXPECT_EQ(back.scenario.L(), sc.L());
    EXPECT_EQ(back.scenario.mode(), sc.mode());
    EXPECT_EQ(back.seed, f.seed);
    EXPECT_EQ(back.max_degree, f.max_degree);
    EXPECT_EQ(back.max_retries, f.max_retries);
    EXPECT_EQ(io::to_json(back).dump(), io::to_json(f).dump());

    GroupElement g = testing_support::random_group_element(rng, sc.vertex_count(), rng.integer(0, 5));
    EXPECT_EQ(io::group_from(io::parse(io::to_json(g).dump()), sc.vertex_count(), "g"), g);
    LaurentPoly p = g.vertex_poly(0);
    EXPECT_EQ(io::laurent_from(io::parse(io::to_json(p).dump(2)), "p"), p);
  }
}
