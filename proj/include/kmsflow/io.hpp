#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "json.hpp"
#include "kmsflow/kms.hpp"
#include "kmsflow/riesz.hpp"

namespace kmsflow::io {

using Json = nlohmann::ordered_json;

// Everything a scenario file carries besides the scenario itself.
struct ScenarioFile {
  Scenario scenario;
  std::uint64_t seed = 0;
  int max_degree = 64;
  int max_retries = 6;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& why) {
  throw ParseError((path.empty() ? std::string("document") : path) + ": " + why);
}

inline const Json& member(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field '" + key + "'");
  return *it;
}

inline std::string sub(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
inline std::string sub(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline int integer_exponent(const std::string& key, const std::string& path) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(key, &used);
  } catch (const std::exception&) {
    fail(path, "exponent '" + key + "' is not an integer");
  }
  if (used != key.size() || v < -100000 || v > 100000) fail(path, "exponent '" + key + "' is not an integer");
  return static_cast<int>(v);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reading

inline Rational rational_from(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(Integer(j.dump()));
  // floats include integers too large for 64 bits, which would already be rounded
  if (j.is_number()) detail::fail(path, "decimal or oversized numbers are not accepted; write \"p/q\" as a string");
  if (!j.is_string()) detail::fail(path, "expected a rational string \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const ParseError& e) {
    detail::fail(path, e.what());
  }
}

inline int int_from(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) detail::fail(path, "expected an integer");
  return j.get<int>();
}

inline LaurentPoly laurent_from(const Json& j, const std::string& path) {
  if (!j.is_object()) detail::fail(path, "expected an {\"exponent\": \"p/q\"} object");
  std::map<int, Rational> terms;
  for (const auto& [k, v] : j.items()) terms[detail::integer_exponent(k, path)] += rational_from(v, detail::sub(path, k));
  return LaurentPoly(std::move(terms));
}

inline AffineElement affine_from(const Json& j, int n, const std::string& path) {
  if (!j.is_array()) detail::fail(path, "expected an array of per-vertex rationals");
  if (static_cast<int>(j.size()) != n)
    detail::fail(path, "expected " + std::to_string(n) + " vertex values, got " + std::to_string(j.size()));
  std::vector<Rational> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(rational_from(j[i], detail::sub(path, i)));
  return AffineElement(std::move(v));
}

inline GroupElement group_from(const Json& j, int n, const std::string& path) {
  if (!j.is_object()) detail::fail(path, "expected an {\"exponent\": [values]} object");
  std::map<int, AffineElement> terms;
  for (const auto& [k, v] : j.items()) {
    AffineElement a = affine_from(v, n, detail::sub(path, k));
    auto [it, fresh] = terms.try_emplace(detail::integer_exponent(k, path), a);
    if (!fresh) it->second += a;
  }
  return GroupElement(n, terms);
}

inline AdmissibleSet set_from(const Json& j, const std::string& path) {
  if (!j.is_object()) detail::fail(path, "expected an admissible set object");
  std::vector<Interval> iv;
  std::vector<Rational> pts;
  std::optional<Rational> ray;
  if (auto it = j.find("intervals"); it != j.end()) {
    if (!it->is_array()) detail::fail(detail::sub(path, "intervals"), "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      std::string p = detail::sub(detail::sub(path, "intervals"), i);
      const Json& pair = (*it)[i];
      if (!pair.is_array() || pair.size() != 2) detail::fail(p, "expected [\"lo\", \"hi\"]");
      iv.push_back({rational_from(pair[0], detail::sub(p, 0)), rational_from(pair[1], detail::sub(p, 1))});
    }
  }
  if (auto it = j.find("points"); it != j.end()) {
    if (!it->is_array()) detail::fail(detail::sub(path, "points"), "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) pts.push_back(rational_from((*it)[i], detail::sub(detail::sub(path, "points"), i)));
  }
  if (auto it = j.find("ray_from"); it != j.end() && !it->is_null()) ray = rational_from(*it, detail::sub(path, "ray_from"));
  try {
    return AdmissibleSet(iv, pts, ray);
  } catch (const InvalidArgument& e) {
    detail::fail(path, e.what());
  }
}

inline ScenarioFile scenario_from(const Json& j, const std::string& path = "") {
  int n = int_from(detail::member(j, "simplex_vertices", path), detail::sub(path, "simplex_vertices"));
  if (n < 1) detail::fail(detail::sub(path, "simplex_vertices"), "must be at least 1");
  const Json& fj = detail::member(j, "face", path);
  if (!fj.is_array()) detail::fail(detail::sub(path, "face"), "expected an array of vertex indices");
  std::vector<int> face;
  for (std::size_t i = 0; i < fj.size(); ++i) face.push_back(int_from(fj[i], detail::sub(detail::sub(path, "face"), i)));
  AdmissibleSet l = set_from(detail::member(j, "L", path), detail::sub(path, "L"));
  const Json& mj = detail::member(j, "mode", path);
  std::string mode = mj.is_string() ? mj.get<std::string>() : "";
  if (mode != "compact" && mode != "unbounded") detail::fail(detail::sub(path, "mode"), "expected \"compact\" or \"unbounded\"");
  ScenarioFile out{[&] {
    try {
      Simplex s(n);
      return Scenario(s, Face(s, face), l, mode == "compact" ? Mode::Compact : Mode::Unbounded);
    } catch (const Error& e) {
      detail::fail(path, e.what());
    }
  }()};
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) detail::fail(detail::sub(path, "seed"), "expected a non-negative integer");
    out.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("caps"); it != j.end()) {
    std::string cp = detail::sub(path, "caps");
    if (!it->is_object()) detail::fail(cp, "expected an object");
    if (auto d = it->find("max_degree"); d != it->end()) out.max_degree = int_from(*d, detail::sub(cp, "max_degree"));
    if (auto r = it->find("max_retries"); r != it->end()) out.max_retries = int_from(*r, detail::sub(cp, "max_retries"));
    if (out.max_degree < 2) detail::fail(detail::sub(cp, "max_degree"), "must be at least 2");
    if (out.max_retries < 0) detail::fail(detail::sub(cp, "max_retries"), "must be non-negative");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Writing

inline Json to_json(const Rational& q) { return to_string(q); }

inline Json to_json(const LaurentPoly& p) {
  Json j = Json::object();
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) j[std::to_string(it->first)] = to_string(it->second);
  return j;
}

inline Json to_json(const AffineElement& a) {
  Json j = Json::array();
  for (const auto& v : a.values()) j.push_back(to_string(v));
  return j;
}

inline Json to_json(const GroupElement& g) {
  Json j = Json::object();
  for (auto it = g.terms().rbegin(); it != g.terms().rend(); ++it) j[std::to_string(it->first)] = to_json(it->second);
  return j;
}

inline Json to_json(const AdmissibleSet& l) {
  Json iv = Json::array(), pts = Json::array();
  for (const auto& c : l.components()) {
    if (c.is_ray()) continue;
    if (c.is_point())
      pts.push_back(to_string(c.lo));
    else
      iv.push_back(Json::array({to_string(c.lo), to_string(*c.hi)}));
  }
  Json j;
  j["intervals"] = iv;
  j["points"] = pts;
  j["ray_from"] = l.ray_from() ? Json(to_string(*l.ray_from())) : Json(nullptr);
  return j;
}

inline Json to_json(const ScenarioFile& f) {
  Json j;
  j["simplex_vertices"] = f.scenario.vertex_count();
  j["face"] = f.scenario.face().vertices();
  j["L"] = to_json(f.scenario.L());
  j["mode"] = f.scenario.mode() == Mode::Compact ? "compact" : "unbounded";
  j["seed"] = f.seed;
  j["caps"] = {{"max_degree", f.max_degree}, {"max_retries", f.max_retries}};
  return j;
}

inline Json to_json(const PositivityWitness& w) {
  Json j;
  j["point"] = to_string(w.point);
  j["value"] = to_string(w.value);
  if (w.bracket) j["bracket"] = Json::array({to_string(w.bracket->lo), to_string(w.bracket->hi)});
  return j;
}

inline const char* kind_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Zero: return "zero";
    case VerdictKind::Positive: return "positive";
    case VerdictKind::NotPositive: return "not_positive";
  }
  return "?";
}

inline Json to_json(const OrderVerdict& v) {
  Json j;
  j["verdict"] = kind_name(v.kind);
  j["degree"] = v.degree ? Json(*v.degree) : Json(nullptr);
  if (v.kind == VerdictKind::Positive) {
    j["margin"] = to_string(v.margin);
    Json certs = Json::array();
    for (const auto& c : v.certificates)
      certs.push_back({{"vertex", c.vertex}, {"checked", to_json(c.checked)}, {"bound", to_string(c.bound)}});
    j["certificates"] = certs;
  }
  if (v.kind == VerdictKind::NotPositive) {
    j["vertex"] = v.vertex;
    j["reason"] = v.reason == Reason::SetViolation ? "set_violation" : "leading_coefficient";
    if (v.witness) j["witness"] = to_json(*v.witness);
  }
  return j;
}

inline Json to_json(const InterpolationTrace& t) {
  auto opt = [](const std::optional<Rational>& q) { return q ? Json(to_string(*q)) : Json(nullptr); };
  auto opt_int = [](const std::optional<int>& k) { return k ? Json(*k) : Json(nullptr); };
  Json j;
  j["engine"] = t.engine;
  j["degenerate"] = t.degenerate;
  j["delta"] = to_string(t.delta);
  j["fit_epsilon"] = to_string(t.fit_epsilon);
  j["cover_points"] = t.cover_points;
  j["epsilon"] = opt(t.epsilon);
  j["epsilon1"] = opt(t.epsilon1);
  j["kappa"] = opt(t.kappa);
  j["R"] = opt(t.R);
  j["J"] = opt_int(t.J);
  j["J_prime"] = opt_int(t.J_prime);
  j["lead_exponents"] = t.lead_exponents;
  j["final_lead_exponents"] = t.final_lead_exponents;
  j["lex_equal"] = t.lex_equal;
  j["cutoff_terms"] = t.cutoff_terms;
  j["lp_samples"] = t.lp_samples;
  j["window"] = t.window ? Json::array({t.window->first, t.window->second}) : Json(nullptr);
  j["retries"] = t.retries;
  return j;
}

inline Json to_json(const CertificateTranscript& tr) {
  Json comps = Json::array();
  for (const auto& c : tr.components) {
    Json cj;
    cj["lo"] = to_string(c.lo);
    cj["hi"] = c.hi ? Json(to_string(*c.hi)) : Json(nullptr);
    cj["value_lo"] = to_string(c.value_lo);
    cj["value_hi"] = c.value_hi ? Json(to_string(*c.value_hi)) : Json(nullptr);
    cj["sturm_roots"] = c.sturm_roots;
    cj["cauchy_bound"] = c.cauchy_bound ? Json(to_string(*c.cauchy_bound)) : Json(nullptr);
    comps.push_back(cj);
  }
  return {{"components", comps}, {"value_at_one", to_string(tr.value_at_one)}, {"value_at_s", to_string(tr.value_at_s)}};
}

inline Json to_json(const SpectrumVerdict& v, const Rational& s) {
  Json j;
  j["s"] = to_string(s);
  j["beta"] = std::log(to_double(s));  // display only
  j["exists"] = v.exists;
  if (v.exists) {
    j["parameter_space"] = v.space == ParamSpace::SimplexParam ? "simplex" : "face";
    std::vector<std::string> y;
    for (const auto& w : v.sample->base_point) y.push_back(to_string(w));
    j["sample"] = {{"base_point", y}, {"s", to_string(v.sample->s)}};
  } else {
    j["certificate"] = to_json(v.certificate);
    j["transcript"] = to_json(v.transcript);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Text and files

// Parses JSON text; syntax errors carry line and column.
inline Json parse(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON", line, col);
  }
}

// "-" means standard input.
inline std::string read_text(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

inline Json load(const std::string& path) { return parse(read_text(path), path == "-" ? "stdin" : path); }

// FNV-1a over the compact dump; stable across runs and platforms.
inline std::string digest(const Json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace kmsflow::io
