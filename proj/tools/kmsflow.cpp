// kmsflow: batch front end for order tests, interpolation and spectrum sweeps.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kmsflow/io.hpp"

using namespace kmsflow;
using io::Json;

namespace {

enum Exit { kOk = 0, kVerdictFailures = 1, kUsage = 2, kInternal = 3 };

struct Options {
  std::string scenario, in, out = "-", engine = "constructive", csv, s_list;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_degree;
  int random = 0;
};

struct Outcome {
  Json items = Json::array();
  bool failures = false;
  bool internal = false;
};

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

io::ScenarioFile load_scenario(const Options& o) {
  if (o.scenario.empty()) throw ParseError("--scenario is required");
  io::ScenarioFile sf = io::scenario_from(io::load(o.scenario), "scenario");
  if (o.seed) sf.seed = *o.seed;
  if (o.max_degree) sf.max_degree = *o.max_degree;
  return sf;
}

Json report_head(const std::string& command, const io::ScenarioFile& sf) {
  Json r;
  r["command"] = command;
  Json sj = io::to_json(sf);
  r["scenario_digest"] = io::digest(sj);
  r["scenario"] = sj;
  return r;
}

// ---------------------------------------------------------------------------
// check

Json check_item(const std::string& name, const GroupElement& g, const Scenario& sc) {
  auto t0 = std::chrono::steady_clock::now();
  OrderVerdict v = order_test(g, sc);
  Json j;
  j["kind"] = "check";
  j["name"] = name;
  j["element"] = io::to_json(g);
  j.update(io::to_json(v));
  j["timing_ms"] = elapsed_ms(t0);
  return j;
}

Outcome run_check(const Json& in, const io::ScenarioFile& sf) {
  Outcome out;
  const Json& list = io::detail::member(in, "elements", "");
  if (!list.is_array()) throw ParseError("elements: expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = "elements[" + std::to_string(i) + "]";
    const Json& e = list[i];
    std::string name = e.is_object() && e.contains("name") && e["name"].is_string() ? e["name"].get<std::string>()
                                                                                      : "#" + std::to_string(i);
    GroupElement g = io::group_from(io::detail::member(e, "element", path), sf.scenario.vertex_count(), path + ".element");
    out.items.push_back(check_item(name, g, sf.scenario));
  }
  return out;
}

// ---------------------------------------------------------------------------
// spectrum / certify

std::vector<Rational> s_values(const Options& o, const std::optional<Json>& in) {
  std::vector<Rational> out;
  if (!o.s_list.empty()) {
    std::stringstream ss(o.s_list);
    for (std::string tok; std::getline(ss, tok, ',');)
      if (!tok.empty()) out.push_back(parse_rational(tok));
  }
  if (in) {
    if (auto it = in->find("s"); it != in->end()) {
      if (!it->is_array()) throw ParseError("s: expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) out.push_back(io::rational_from((*it)[i], "s[" + std::to_string(i) + "]"));
    }
    if (auto it = in->find("sweep"); it != in->end()) {
      Rational from = io::rational_from(io::detail::member(*it, "from", "sweep"), "sweep.from");
      Rational to = io::rational_from(io::detail::member(*it, "to", "sweep"), "sweep.to");
      Rational step = io::rational_from(io::detail::member(*it, "step", "sweep"), "sweep.step");
      if (step <= 0) throw ParseError("sweep.step: must be positive");
      if ((to - from) / step > 100000) throw ParseError("sweep: more than 100000 points");
      for (Rational s = from; s <= to; s += step) out.push_back(s);
    }
  }
  for (const auto& s : out)
    if (s <= 0) throw ParseError("s values must be positive, got " + to_string(s));
  return out;
}

Json spectrum_item(const Rational& s, const io::ScenarioFile& sf, Outcome& out) {
  auto t0 = std::chrono::steady_clock::now();
  Json j;
  j["kind"] = "spectrum";
  try {
    CertificateOptions opt;
    opt.max_terms = sf.max_degree;
    j.update(io::to_json(spectrum_query(s, sf.scenario, opt), s));
  } catch (const CertificateSearchFailed& e) {
    j["s"] = to_string(s);
    j["beta"] = std::log(to_double(s));
    j["error"] = e.what();
    out.failures = true;
  } catch (const InternalError& e) {
    j["s"] = to_string(s);
    j["error"] = e.what();
    out.internal = true;
  }
  j["timing_ms"] = elapsed_ms(t0);
  return j;
}

Outcome run_spectrum(const std::vector<Rational>& ss, const io::ScenarioFile& sf) {
  Outcome out;
  for (const auto& s : ss) out.items.push_back(spectrum_item(s, sf, out));
  return out;
}

Outcome run_certify(const std::vector<Rational>& ss, const io::ScenarioFile& sf) {
  Outcome out;
  for (const auto& s : ss) {
    auto t0 = std::chrono::steady_clock::now();
    Json j;
    j["kind"] = "spectrum";
    j["s"] = to_string(s);
    j["beta"] = std::log(to_double(s));
    try {
      CertificateOptions opt;
      opt.max_terms = sf.max_degree;
      LaurentPoly p = nonexistence_certificate(s, sf.scenario, opt);
      j["exists"] = false;
      j["certificate"] = io::to_json(p);
      j["transcript"] = io::to_json(certificate_transcript(p, s, sf.scenario.L()));
    } catch (const InvalidArgument& e) {
      j["error"] = e.what();
      out.failures = true;
    } catch (const CertificateSearchFailed& e) {
      j["error"] = e.what();
      out.failures = true;
    } catch (const InternalError& e) {
      j["error"] = e.what();
      out.internal = true;
    }
    j["timing_ms"] = elapsed_ms(t0);
    out.items.push_back(j);
  }
  return out;
}

Json spectrum_summary(const Json& items) {
  int exists = 0, absent = 0, errors = 0;
  Json table = Json::array();
  for (const auto& it : items) {
    std::string v = it.contains("error") ? "Error" : (it["exists"].get<bool>() ? "Exists" : "Absent");
    (v == "Exists" ? exists : v == "Absent" ? absent : errors)++;
    table.push_back(Json::array({it["s"], v}));
  }
  return {{"exists", exists}, {"absent", absent}, {"errors", errors}, {"table", table}};
}

void write_csv(const std::string& path, const Json& items) {
  std::ostringstream os;
  os << "s,exists,beta\n";
  for (const auto& it : items) {
    if (it.contains("error")) continue;
    os << it["s"].get<std::string>() << "," << (it["exists"].get<bool>() ? 1 : 0) << "," << std::setprecision(10)
       << it["beta"].get<double>() << "\n";
  }
  io::write_text(path, os.str());
}

// ---------------------------------------------------------------------------
// interp

struct Problem {
  std::string name;
  InterpolationProblem p;
};

// Feasible by construction: c = g0 - slack, d = g0 + slack, slacks positive monomials.
std::vector<Problem> random_problems(int count, std::uint64_t seed, const Scenario& sc) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
  const int n = sc.vertex_count();
  auto slack = [&] {
    GroupElement s(n);
    int terms = pick(1, 2);
    for (int i = 0; i < terms; ++i) {
      std::vector<Rational> v(n);
      for (auto& q : v) q = ratio(pick(2, 24), 8);
      s += GroupElement::at(pick(-4, 4), AffineElement(v));
    }
    return s;
  };
  std::vector<Problem> out;
  for (int k = 0; k < count; ++k) {
    std::map<int, AffineElement> t;
    int terms = pick(1, 4);
    for (int i = 0; i < terms; ++i) {
      std::vector<Rational> v(n);
      for (auto& q : v) {
        int d = pick(1, 4);
        q = ratio(pick(-10 * d, 10 * d), d);
      }
      t.try_emplace(pick(-4, 4), AffineElement::zero(n)).first->second += AffineElement(v);
    }
    GroupElement g0(n, t);
    out.push_back({"random#" + std::to_string(k), {{g0 - slack(), g0 - slack()}, {g0 + slack(), g0 + slack()}, sc}});
  }
  return out;
}

std::vector<Problem> problems_from(const Json& in, const Scenario& sc) {
  const Json& list = io::detail::member(in, "problems", "");
  if (!list.is_array()) throw ParseError("problems: expected an array");
  std::vector<Problem> out;
  const int n = sc.vertex_count();
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = "problems[" + std::to_string(i) + "]";
    const Json& e = list[i];
    std::string name = e.is_object() && e.contains("name") && e["name"].is_string() ? e["name"].get<std::string>()
                                                                                      : "#" + std::to_string(i);
    auto pair = [&](const char* key) {
      const Json& a = io::detail::member(e, key, path);
      std::string p = path + "." + key;
      if (!a.is_array() || a.size() != 2) throw ParseError(p + ": expected two elements");
      return std::array<GroupElement, 2>{io::group_from(a[0], n, p + "[0]"), io::group_from(a[1], n, p + "[1]")};
    };
    out.push_back({name, {pair("lowers"), pair("uppers"), sc}});
  }
  return out;
}

Json relation_report(const InterpolationProblem& p, const GroupElement& g) {
  static const char* names[] = {"g - c1", "g - c2", "d1 - g", "d2 - g"};
  auto diffs = kmsflow::detail::differences(p.lowers, p.uppers, g);
  Json rel = Json::array();
  for (int r = 0; r < 4; ++r) {
    OrderVerdict v = order_test(diffs[r], p.scenario, false);
    Json j;
    j["relation"] = names[r];
    j["verdict"] = io::kind_name(v.kind);
    j["degree"] = v.degree ? Json(*v.degree) : Json(nullptr);
    rel.push_back(j);
  }
  return rel;
}

Json interp_item(const Problem& pr, const std::string& engine, int max_retries, Outcome& out) {
  Json j;
  j["kind"] = "interp";
  j["name"] = pr.name;
  j["lowers"] = Json::array({io::to_json(pr.p.lowers[0]), io::to_json(pr.p.lowers[1])});
  j["uppers"] = Json::array({io::to_json(pr.p.uppers[0]), io::to_json(pr.p.uppers[1])});
  std::vector<std::string> engines;
  if (engine == "both")
    engines = {"constructive", "lp"};
  else
    engines = {engine};
  RieszOptions opt;
  opt.max_retries = max_retries;
  Json results = Json::array();
  bool all_ok = true;
  for (const auto& e : engines) {
    auto t0 = std::chrono::steady_clock::now();
    Json r;
    r["engine"] = e;
    try {
      InterpolationTrace tr;
      GroupElement g;
      if (e == "lp")
        g = interpolate_lp(pr.p, &tr, opt);
      else if (pr.p.scenario.mode() == Mode::Compact)
        g = interpolate_compact(pr.p, &tr, opt);
      else
        g = interpolate_unbounded(pr.p, &tr, opt);
      r["ok"] = true;
      r["interpolant"] = io::to_json(g);
      r["relations"] = relation_report(pr.p, g);
      r["trace"] = io::to_json(tr);
    } catch (const PreconditionViolated& ex) {
      r["ok"] = false;
      r["error"] = ex.what();
      r["error_kind"] = "precondition_violated";
      r["pair"] = {{"lower", ex.lower() + 1}, {"upper", ex.upper() + 1}};
      out.failures = true;
    } catch (const Infeasible& ex) {
      r["ok"] = false;
      r["error"] = ex.what();
      r["error_kind"] = "infeasible";
      out.failures = true;
    } catch (const RetriesExhausted& ex) {
      r["ok"] = false;
      r["error"] = ex.what();
      r["error_kind"] = "retries_exhausted";
      r["trace"] = io::to_json(ex.trace());
      out.internal = true;
    } catch (const InternalError& ex) {
      r["ok"] = false;
      r["error"] = ex.what();
      r["error_kind"] = "internal";
      out.internal = true;
    }
    all_ok = all_ok && r["ok"].get<bool>();
    r["timing_ms"] = elapsed_ms(t0);
    results.push_back(r);
  }
  j["results"] = results;
  if (engines.size() > 1) j["agree"] = all_ok;
  return j;
}

Outcome run_interp(const std::vector<Problem>& problems, const std::string& engine, int max_retries) {
  Outcome out;
  for (const auto& pr : problems) out.items.push_back(interp_item(pr, engine, max_retries, out));
  return out;
}

Json interp_summary(const Json& items) {
  int ok = 0, failed = 0, agree = 0;
  for (const auto& it : items) {
    for (const auto& r : it["results"]) (r["ok"].get<bool>() ? ok : failed)++;
    if (it.contains("agree") && it["agree"].get<bool>()) ++agree;
  }
  return {{"succeeded", ok}, {"failed", failed}, {"agreeing", agree}};
}

// ---------------------------------------------------------------------------
// verify: re-checks a report with Laurent arithmetic, exact evaluation and
// Sturm positivity only, without the order test or the interpolation code.

bool relation_holds(const GroupElement& d, const Scenario& sc) {
  if (d.is_zero()) return true;
  std::optional<int> deg;
  if (sc.mode() == Mode::Unbounded) {
    int top = d.terms().rbegin()->first;
    for (const auto& a : d.terms().rbegin()->second.values())
      if (a <= 0) return false;
    deg = top;
  }
  for (int v : sc.face().vertices()) {
    LaurentPoly p = d.vertex_poly(v);
    if (deg) p = p.shifted(-*deg);
    if (p.is_zero() || !sturm_positive_on(p, sc.L()).positive) return false;
  }
  for (int w : sc.face().complement())
    if (d.vertex_poly(w)(1) <= 0) return false;
  return true;
}

std::pair<bool, std::string> verify_check(const Json& it, const Scenario& sc) {
  GroupElement g = io::group_from(it["element"], sc.vertex_count(), "element");
  std::string v = it["verdict"];
  if (v == "zero") return {g.is_zero(), "element is zero"};
  if (v == "positive") {
    if (!relation_holds(g, sc)) return {false, "element is not positive"};
    std::optional<int> deg;
    if (!it["degree"].is_null()) deg = it["degree"].get<int>();
    for (const auto& c : it["certificates"]) {
      int vtx = c["vertex"];
      LaurentPoly checked = io::laurent_from(c["checked"], "checked");
      LaurentPoly expect = g.vertex_poly(vtx);
      if (!sc.face().contains(vtx))
        expect = LaurentPoly::constant(expect(1));
      else if (deg)
        expect = expect.shifted(-*deg);
      if (!(checked == expect)) return {false, "certificate polynomial does not match the element"};
      // bound may be the attained minimum; clear it up to a relative 2^-32
      Rational bound = io::rational_from(c["bound"], "bound");
      Rational slack = bound * (1 - Rational(1) / Rational(Integer(1) << 32));
      if (bound <= 0 || !sturm_positive_on(checked - LaurentPoly::constant(slack), sc.L()).positive)
        return {false, "certificate bound fails"};
    }
    return {true, "positive"};
  }
  // not_positive: the witness must show it.
  if (it["reason"] == "leading_coefficient") {
    if (g.is_zero()) return {false, "zero element"};
    int w = it["vertex"];
    return {g.terms().rbegin()->second[w] <= 0, "leading coefficient"};
  }
  int vtx = it["vertex"];
  Rational t = io::rational_from(it["witness"]["point"], "witness.point");
  LaurentPoly p = g.vertex_poly(vtx);
  if (!it["degree"].is_null()) p = p.shifted(-it["degree"].get<int>());
  bool on_set = sc.face().contains(vtx) ? sc.L().contains(t) : t == 1;
  if (on_set && p(t) <= 0) return {true, "witness"};
  // Irrational touch points come with a bracket; recheck with Sturm instead.
  return {!relation_holds(g, sc), "not positive"};
}

std::pair<bool, std::string> verify_spectrum(const Json& it, const Scenario& sc) {
  if (it.contains("error")) return {false, "item carries an error"};
  Rational s = io::rational_from(it["s"], "s");
  if (it["exists"].get<bool>()) {
    if (!sc.L().contains(s)) return {false, "s is not in L"};
    std::vector<Rational> y;
    for (const auto& w : it["sample"]["base_point"]) y.push_back(io::rational_from(w, "base_point"));
    KmsFunctional f{y, io::rational_from(it["sample"]["s"], "sample.s")};
    if (f.s != s) return {false, "sample functional has another s"};
    return {eigen_verify(f, generator_battery(sc.vertex_count())), "sample functional"};
  }
  LaurentPoly p = io::laurent_from(it["certificate"], "certificate");
  if (!verify_certificate(p, s, sc.L())) return {false, "certificate fails"};
  Json tr = io::to_json(certificate_transcript(p, s, sc.L()));
  if (it.contains("transcript") && tr != it["transcript"]) return {false, "transcript does not match"};
  return {true, "certificate"};
}

std::pair<bool, std::string> verify_interp(const Json& it, const Scenario& sc) {
  const int n = sc.vertex_count();
  std::array<GroupElement, 2> lo{io::group_from(it["lowers"][0], n, "lowers[0]"), io::group_from(it["lowers"][1], n, "lowers[1]")};
  std::array<GroupElement, 2> up{io::group_from(it["uppers"][0], n, "uppers[0]"), io::group_from(it["uppers"][1], n, "uppers[1]")};
  bool any = false;
  for (const auto& r : it["results"]) {
    if (!r["ok"].get<bool>()) {
      if (r.value("error_kind", "") != "precondition_violated") return {false, "nothing to verify"};
      int l = r["pair"]["lower"].get<int>() - 1, u = r["pair"]["upper"].get<int>() - 1;
      if (l < 0 || l > 1 || u < 0 || u > 1 || relation_holds(up[u] - lo[l], sc)) return {false, "precondition holds after all"};
      any = true;
      continue;
    }
    any = true;
    GroupElement g = io::group_from(r["interpolant"], n, "interpolant");
    for (const auto& d : {g - lo[0], g - lo[1], up[0] - g, up[1] - g})
      if (!relation_holds(d, sc)) return {false, r["engine"].get<std::string>() + " interpolant fails a relation"};
  }
  return {any, any ? "interpolants" : "no results"};
}

Outcome run_verify(const Json& report) {
  Outcome out;
  io::ScenarioFile sf = io::scenario_from(io::detail::member(report, "scenario", ""), "scenario");
  const Json& items = io::detail::member(report, "items", "");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Json& it = items[i];
    std::string kind = it.value("kind", "");
    std::pair<bool, std::string> r{false, "unknown item kind"};
    try {
      if (kind == "check") r = verify_check(it, sf.scenario);
      if (kind == "spectrum") r = verify_spectrum(it, sf.scenario);
      if (kind == "interp") r = verify_interp(it, sf.scenario);
    } catch (const Json::exception& e) {
      r = {false, std::string("malformed item: ") + e.what()};
    }
    Json j;
    j["index"] = i;
    j["kind"] = kind;
    if (it.contains("name")) j["name"] = it["name"];
    if (it.contains("s")) j["s"] = it["s"];
    j["verified"] = r.first;
    j["detail"] = r.second;
    if (!r.first) out.failures = true;
    out.items.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// demo

io::ScenarioFile demo_scenario() {
  Simplex s(1);
  return {Scenario(s, Face::whole(s), AdmissibleSet::interval(ratio(1, 2), 2), Mode::Compact), 0, 64, 6};
}

Outcome run_demo(const io::ScenarioFile& sf) {
  Outcome out;
  auto el = [](std::map<int, Rational> t) { return GroupElement::from_laurent(1, LaurentPoly(std::move(t))); };
  out.items.push_back(check_item("t + 1", el({{1, 1}, {0, 1}}), sf.scenario));
  out.items.push_back(check_item("t - 1", el({{1, 1}, {0, -1}}), sf.scenario));
  out.items.push_back(check_item("0", GroupElement(1), sf.scenario));
  for (const auto& s : {ratio(1, 4), ratio(1, 2), Rational(1), Rational(2), Rational(3)})
    out.items.push_back(spectrum_item(s, sf, out));
  Problem pr{"example", {{GroupElement(1), el({{1, 1}, {0, -1}})}, {el({{0, 2}}), el({{1, 1}, {0, 1}})}, sf.scenario}};
  out.items.push_back(interp_item(pr, "both", sf.max_retries, out));
  return out;
}

int finish(Json report, const Outcome& out, const Options& o) {
  io::write_text(o.out, report.dump(2) + "\n");
  if (out.internal) return kInternal;
  return out.failures ? kVerdictFailures : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified order tests, Riesz interpolation and KMS spectra for Laurent dimension groups"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool needs_scenario, bool needs_in) {
    auto* sc = sub->add_option("--scenario", o.scenario, "scenario JSON file ('-' for stdin)");
    if (needs_scenario) sc->required();
    auto* in = sub->add_option("--in", o.in, "input JSON file ('-' for stdin)");
    if (needs_in) in->required();
    sub->add_option("--out", o.out, "report file ('-' for stdout)");
    sub->add_option("--seed", o.seed, "seed, overrides the scenario's");
    sub->add_option("--max-degree", o.max_degree, "monomial cap for certificate search");
  };
  auto* check = app.add_subcommand("check", "order test for each element");
  common(check, true, true);
  auto* interp = app.add_subcommand("interp", "Riesz interpolation for each problem");
  common(interp, true, false);
  interp->add_option("--engine", o.engine, "constructive, lp or both")->check(CLI::IsMember({"constructive", "lp", "both"}));
  interp->add_option("--random", o.random, "generate this many random feasible problems instead of --in");
  auto* spectrum = app.add_subcommand("spectrum", "KMS spectrum verdicts for s values");
  common(spectrum, true, false);
  spectrum->add_option("--s", o.s_list, "comma separated s values");
  spectrum->add_option("--csv", o.csv, "also write s,exists,beta CSV here");
  auto* certify = app.add_subcommand("certify", "nonexistence certificates for s outside L");
  common(certify, true, false);
  certify->add_option("--s", o.s_list, "comma separated s values");
  auto* verify = app.add_subcommand("verify", "re-verify every certificate in a report");
  verify->add_option("--in", o.in, "report JSON file ('-' for stdin)")->required();
  verify->add_option("--out", o.out, "verification report ('-' for stdout)");
  auto* demo = app.add_subcommand("demo", "run every command on a built-in scenario");
  demo->add_option("--out", o.out, "report file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*check) {
      io::ScenarioFile sf = load_scenario(o);
      Outcome out = run_check(io::load(o.in), sf);
      Json r = report_head("check", sf);
      r["items"] = out.items;
      return finish(r, out, o);
    }
    if (*spectrum || *certify) {
      io::ScenarioFile sf = load_scenario(o);
      std::optional<Json> in;
      if (!o.in.empty()) in = io::load(o.in);
      std::vector<Rational> ss = s_values(o, in);
      Outcome out = *spectrum ? run_spectrum(ss, sf) : run_certify(ss, sf);
      Json r = report_head(*spectrum ? "spectrum" : "certify", sf);
      r["items"] = out.items;
      r["summary"] = spectrum_summary(out.items);
      if (*spectrum && !o.csv.empty()) write_csv(o.csv, out.items);
      return finish(r, out, o);
    }
    if (*interp) {
      io::ScenarioFile sf = load_scenario(o);
      std::vector<Problem> problems;
      if (o.random > 0)
        problems = random_problems(o.random, sf.seed, sf.scenario);
      else if (!o.in.empty())
        problems = problems_from(io::load(o.in), sf.scenario);
      else
        throw ParseError("interp needs --in or --random");
      Outcome out = run_interp(problems, o.engine, sf.max_retries);
      Json r = report_head("interp", sf);
      r["engine"] = o.engine;
      r["items"] = out.items;
      r["summary"] = interp_summary(out.items);
      return finish(r, out, o);
    }
    if (*verify) {
      Json report = io::load(o.in);
      Outcome out = run_verify(report);
      io::ScenarioFile sf = io::scenario_from(report["scenario"], "scenario");
      Json r = report_head("verify", sf);
      r["source_command"] = report.value("command", "");
      r["items"] = out.items;
      int ok = 0;
      for (const auto& it : out.items) ok += it["verified"].get<bool>() ? 1 : 0;
      r["summary"] = {{"verified", ok}, {"failed", static_cast<int>(out.items.size()) - ok}};
      return finish(r, out, o);
    }
    if (*demo) {
      io::ScenarioFile sf = demo_scenario();
      Outcome out = run_demo(sf);
      Json r = report_head("demo", sf);
      r["items"] = out.items;
      return finish(r, out, o);
    }
  } catch (const ParseError& e) {
    std::cerr << "kmsflow: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "kmsflow: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionMismatch& e) {
    std::cerr << "kmsflow: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "kmsflow: internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
