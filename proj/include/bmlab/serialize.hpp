#pragma once

// JSON forms of bodies, measures, functions and potentials. Parsers reject
// unknown keys and report the offending path.

#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"
#include "integrate.hpp"
#include "measures.hpp"
#include "report.hpp"

namespace bmlab {

namespace io {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::BadConfig, where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) fail(ErrorCode::BadConfig, where + ": unknown key '" + k + "'");
  }
}

inline const json& req(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::BadConfig, where + ": missing key '" + key + "'");
  return *it;
}

inline double get_num(const json& j, const char* key, const std::string& where) {
  try {
    return num(req(j, key, where));
  } catch (const Error& e) {
    fail(ErrorCode::BadConfig, where + "." + key + ": " + e.what());
  }
}
inline double get_num(const json& j, const char* key, const std::string& where, double dflt) {
  return j.contains(key) ? get_num(j, key, where) : dflt;
}
inline int get_int(const json& j, const char* key, const std::string& where) {
  const json& v = req(j, key, where);
  if (!v.is_number_integer()) fail(ErrorCode::BadConfig, where + "." + key + ": expected an integer");
  return v.get<int>();
}
inline int get_int(const json& j, const char* key, const std::string& where, int dflt) {
  return j.contains(key) ? get_int(j, key, where) : dflt;
}
inline std::string get_str(const json& j, const char* key, const std::string& where) {
  const json& v = req(j, key, where);
  if (!v.is_string()) fail(ErrorCode::BadConfig, where + "." + key + ": expected a string");
  return v.get<std::string>();
}
inline int get_dim(const json& j, const std::string& where) {
  int n = get_int(j, "n", where);
  if (n < 1 || n > 3) fail(ErrorCode::BadConfig, where + ".n: dimension must be 1, 2 or 3");
  return n;
}

inline json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}
inline Vec vec_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || j.size() > 6) fail(ErrorCode::BadConfig, where + ": expected a short array");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = num(j[i]);
  return v;
}
inline std::vector<double> dvec_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::BadConfig, where + ": expected an array");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(num(x));
  return v;
}
inline json mat_json(const Mat& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int k = 0; k < m.cols(); ++k) r.push_back(num(m(i, k)));
    a.push_back(r);
  }
  return a;
}
inline Mat mat_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || j.size() > 6) fail(ErrorCode::BadConfig, where + ": expected a square matrix");
  int n = static_cast<int>(j.size());
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n)
      fail(ErrorCode::BadConfig, where + ": expected a square matrix");
    for (int k = 0; k < n; ++k) m(i, k) = num(j[i][k]);
  }
  return m;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Bodies

inline json to_json(const SymmetricBody& b) {
  const int n = b.dim();
  return std::visit(
      [&](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, EmptyShape>) return {{"type", "empty"}, {"n", n}};
        else if constexpr (std::is_same_v<S, BallShape>) return {{"type", "ball"}, {"n", n}, {"r", num(s.r)}};
        else if constexpr (std::is_same_v<S, BoxShape>) {
          json a = json::array();
          for (double x : s.a) a.push_back(num(x));
          return {{"type", "box"}, {"a", a}};
        } else if constexpr (std::is_same_v<S, EllipsoidShape>) {
          json a = json::array();
          for (double x : s.a) a.push_back(num(x));
          return {{"type", "ellipsoid"}, {"a", a}};
        } else if constexpr (std::is_same_v<S, PolygonShape>) {
          json v = json::array();
          for (const auto& p : s.input) v.push_back(io::vec_json(p));
          return {{"type", "polygon"}, {"vertices", v}};
        } else if constexpr (std::is_same_v<S, TabulatedShape>) {
          json h = json::array();
          for (double x : s.h) h.push_back(num(x));
          json j = {{"type", "tabulated"}, {"n", n}};
          if (n == 2) j["m"] = s.grid->azimuthal();
          if (n == 3) {
            j["azimuthal"] = s.grid->azimuthal();
            j["polar"] = s.grid->polar();
          }
          j["h"] = h;
          return j;
        } else {
          return {{"type", "combination"}, {"lambda", num(s.lambda)}, {"k", to_json(*s.k)}, {"l", to_json(*s.l)}};
        }
      },
      b.shape());
}

inline SymmetricBody body_from_json(const json& j, const std::string& where = "body") {
  std::string t = io::get_str(j, "type", where);
  if (t == "empty") {
    io::check_keys(j, {"type", "n"}, where);
    return SymmetricBody::empty(io::get_dim(j, where));
  }
  if (t == "ball") {
    io::check_keys(j, {"type", "n", "r"}, where);
    return SymmetricBody::ball(io::get_dim(j, where), io::get_num(j, "r", where));
  }
  if (t == "interval") {
    io::check_keys(j, {"type", "a"}, where);
    return SymmetricBody::interval(io::get_num(j, "a", where));
  }
  if (t == "box") {
    io::check_keys(j, {"type", "a"}, where);
    return SymmetricBody::box(io::dvec_from(io::req(j, "a", where), where + ".a"));
  }
  if (t == "ellipsoid") {
    io::check_keys(j, {"type", "a"}, where);
    return SymmetricBody::ellipsoid(io::dvec_from(io::req(j, "a", where), where + ".a"));
  }
  if (t == "polygon") {
    io::check_keys(j, {"type", "vertices"}, where);
    std::vector<Vec> vs;
    const json& a = io::req(j, "vertices", where);
    if (!a.is_array()) fail(ErrorCode::BadConfig, where + ".vertices: expected an array");
    for (const auto& v : a) vs.push_back(io::vec_from(v, where + ".vertices"));
    return SymmetricBody::polygon(vs);
  }
  if (t == "tabulated") {
    io::check_keys(j, {"type", "n", "m", "azimuthal", "polar", "h"}, where);
    int n = io::get_dim(j, where);
    auto g = std::make_shared<const DirectionGrid>(DirectionGrid::make(
        n, io::get_int(j, "m", where, 512), io::get_int(j, "azimuthal", where, 64), io::get_int(j, "polar", where, 32)));
    return SymmetricBody::tabulated(g, io::dvec_from(io::req(j, "h", where), where + ".h"));
  }
  if (t == "combination") {
    io::check_keys(j, {"type", "lambda", "k", "l"}, where);
    return minkowski_combine(body_from_json(io::req(j, "k", where), where + ".k"),
                             body_from_json(io::req(j, "l", where), where + ".l"), io::get_num(j, "lambda", where));
  }
  fail(ErrorCode::BadConfig, where + ".type: unknown body type '" + t + "'");
}

// ---------------------------------------------------------------------------
// Measures

inline json to_json(const RadialWeight& w) {
  return std::visit(
      [&](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Lebesgue>) return {{"weight", "lebesgue"}};
        else if constexpr (std::is_same_v<F, Gaussian>) return {{"weight", "gaussian"}};
        else if constexpr (std::is_same_v<F, PowerWeight>) return {{"weight", "power"}, {"alpha", num(f.alpha)}};
        else if constexpr (std::is_same_v<F, HeavyTail>)
          return {{"weight", "heavy_tail"}, {"a", num(f.a)}, {"b", num(f.b)}};
        else fail(ErrorCode::BadConfig, "custom weight '" + f.label + "' has no JSON form");
      },
      w.family());
}

inline RadialWeight radial_weight_from_json(const json& j, const std::string& where) {
  std::string t = io::get_str(j, "weight", where);
  if (t == "lebesgue") {
    io::check_keys(j, {"weight", "n"}, where);
    return RadialWeight::lebesgue();
  }
  if (t == "gaussian") {
    io::check_keys(j, {"weight", "n"}, where);
    return RadialWeight::gaussian();
  }
  if (t == "power") {
    io::check_keys(j, {"weight", "n", "alpha"}, where);
    return RadialWeight::power(io::get_num(j, "alpha", where));
  }
  if (t == "heavy_tail") {
    io::check_keys(j, {"weight", "n", "a", "b"}, where);
    return RadialWeight::heavy_tail(io::get_num(j, "a", where), io::get_num(j, "b", where));
  }
  fail(ErrorCode::BadConfig, where + ".weight: unknown weight '" + t + "'");
}

inline json to_json(const WeightedMeasure& mu) {
  if (mu.is_radial()) {
    json j = to_json(mu.weight());
    j["n"] = mu.dim();
    return j;
  }
  json f = json::array();
  for (const auto& w : mu.product().factors) f.push_back(to_json(w));
  return {{"product", f}};
}

inline WeightedMeasure measure_from_json(const json& j, const std::string& where = "measure") {
  if (j.contains("product")) {
    io::check_keys(j, {"product"}, where);
    const json& a = j["product"];
    if (!a.is_array() || a.empty() || a.size() > 3) fail(ErrorCode::BadConfig, where + ".product: 1 to 3 factors");
    ProductWeight p;
    for (std::size_t i = 0; i < a.size(); ++i)
      p.factors.push_back(radial_weight_from_json(a[i], where + ".product[" + std::to_string(i) + "]"));
    return WeightedMeasure(p);
  }
  RadialWeight w = radial_weight_from_json(j, where);
  return WeightedMeasure(io::get_dim(j, where), w);
}

// ---------------------------------------------------------------------------
// Concave and joint functions

inline json cap_json(const Cap& c) {
  return std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantCap>) return {{"type", "constant"}, {"c", num(s.c)}};
        else if constexpr (std::is_same_v<S, QuadraticCap>)
          return {{"type", "quadratic"}, {"c", num(s.c)}, {"q", io::mat_json(s.q)}};
        else return {{"type", "power"}, {"c", num(s.c)}, {"a", num(s.a)}, {"p", num(s.p)}};
      },
      c);
}

inline json to_json(const ConcaveFunction& f) {
  json j;
  if (auto* m = std::get_if<MinCaps>(&f.rule())) {
    json parts = json::array();
    for (const auto& c : m->parts) parts.push_back(cap_json(c));
    j = {{"type", "min"}, {"parts", parts}};
  } else {
    j = std::visit(
        [](const auto& s) -> json {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, MinCaps>) return {};
          else return cap_json(Cap{s});
        },
        f.rule());
  }
  j["n"] = f.dim();
  return j;
}

inline Cap cap_from_json(const json& j, int n, const std::string& where) {
  std::string t = io::get_str(j, "type", where);
  if (t == "constant") {
    io::check_keys(j, {"type", "n", "c"}, where);
    return ConstantCap{io::get_num(j, "c", where)};
  }
  if (t == "quadratic") {
    io::check_keys(j, {"type", "n", "c", "q"}, where);
    Mat q = io::mat_from(io::req(j, "q", where), where + ".q");
    if (q.rows() != n) fail(ErrorCode::GridMismatch, where + ".q: matrix size differs from n");
    return QuadraticCap{io::get_num(j, "c", where), q};
  }
  if (t == "isotropic") {  // c - b|x|^2
    io::check_keys(j, {"type", "n", "c", "b"}, where);
    return QuadraticCap{io::get_num(j, "c", where), io::get_num(j, "b", where) * Mat::Identity(n, n)};
  }
  if (t == "power") {
    io::check_keys(j, {"type", "n", "c", "a", "p"}, where);
    return PowerCap{io::get_num(j, "c", where), io::get_num(j, "a", where), io::get_num(j, "p", where)};
  }
  fail(ErrorCode::BadConfig, where + ".type: unknown function type '" + t + "'");
}

inline ConcaveFunction concave_from_json(const json& j, const std::string& where = "phi") {
  int n = io::get_dim(j, where);
  if (io::get_str(j, "type", where) == "min") {
    io::check_keys(j, {"type", "n", "parts"}, where);
    const json& a = io::req(j, "parts", where);
    if (!a.is_array() || a.empty()) fail(ErrorCode::BadConfig, where + ".parts: expected a nonempty array");
    std::vector<Cap> parts;
    for (std::size_t i = 0; i < a.size(); ++i)
      parts.push_back(cap_from_json(a[i], n, where + ".parts[" + std::to_string(i) + "]"));
    return ConcaveFunction::min_of(n, parts);
  }
  return std::visit([&](const auto& c) { return ConcaveFunction(n, c); }, cap_from_json(j, n, where));
}

inline json to_json(const JointFunction& f) {
  if (auto* z = std::get_if<FrozenInT>(&f.rule())) return {{"type", "frozen"}, {"phi", to_json(z->f)}};
  const auto& r = std::get<RadialPoly>(f.rule());
  return {{"type", "radial_poly"}, {"n", f.dim()}, {"c", num(r.c)}, {"p", num(r.p)}, {"a", num(r.a)},
          {"b", num(r.b)},         {"d", num(r.d)}, {"e", num(r.e)}};
}

inline JointFunction joint_from_json(const json& j, const std::string& where = "phi") {
  std::string t = io::get_str(j, "type", where);
  if (t == "frozen") {
    io::check_keys(j, {"type", "phi"}, where);
    return JointFunction::frozen(concave_from_json(io::req(j, "phi", where), where + ".phi"));
  }
  if (t == "radial_poly") {
    io::check_keys(j, {"type", "n", "c", "p", "a", "b", "d", "e"}, where);
    RadialPoly r;
    r.c = io::get_num(j, "c", where, 1.0);
    r.p = io::get_num(j, "p", where, 0.0);
    r.a = io::get_num(j, "a", where, 0.0);
    r.b = io::get_num(j, "b", where, 0.0);
    r.d = io::get_num(j, "d", where, 0.0);
    r.e = io::get_num(j, "e", where, 0.0);
    return JointFunction::radial_poly(io::get_dim(j, where), r);
  }
  fail(ErrorCode::BadConfig, where + ".type: unknown joint function '" + t + "'");
}

inline json to_json(const ConvexDomainFamily& f) {
  return std::visit(
      [&](const auto& r) -> json {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, MinkowskiPath>)
          return {{"type", "minkowski"}, {"k", to_json(r.k)}, {"l", to_json(r.l)}};
        else if constexpr (std::is_same_v<R, RadiusProfile>)
          return {{"type", "profile"},
                  {"n", f.dim()},
                  {"lo", num(f.t_lo())},
                  {"hi", num(f.t_hi())},
                  {"kind", r.kind == RadiusProfile::Affine ? "affine" : "quadric"},
                  {"c0", num(r.c0)},
                  {"c1", num(r.c1)},
                  {"c2", num(r.c2)}};
        else
          return {{"type", "super_level"},
                  {"phi", to_json(r.phi)},
                  {"level", num(r.level)},
                  {"lo", num(f.t_lo())},
                  {"hi", num(f.t_hi())}};
      },
      f.rule());
}

inline ConvexDomainFamily family_from_json(const json& j, const std::string& where = "family") {
  std::string t = io::get_str(j, "type", where);
  if (t == "minkowski") {
    io::check_keys(j, {"type", "k", "l"}, where);
    return ConvexDomainFamily::minkowski(body_from_json(io::req(j, "k", where), where + ".k"),
                                         body_from_json(io::req(j, "l", where), where + ".l"));
  }
  if (t == "disc") {
    io::check_keys(j, {"type"}, where);
    return ConvexDomainFamily::disc_sections();
  }
  if (t == "profile") {
    io::check_keys(j, {"type", "n", "lo", "hi", "kind", "c0", "c1", "c2"}, where);
    RadiusProfile p;
    std::string k = io::get_str(j, "kind", where);
    if (k == "affine") p.kind = RadiusProfile::Affine;
    else if (k == "quadric") p.kind = RadiusProfile::Quadric;
    else fail(ErrorCode::BadConfig, where + ".kind: expected 'affine' or 'quadric'");
    p.c0 = io::get_num(j, "c0", where);
    p.c1 = io::get_num(j, "c1", where, 0.0);
    p.c2 = io::get_num(j, "c2", where, 0.0);
    return ConvexDomainFamily::profile(io::get_dim(j, where), io::get_num(j, "lo", where), io::get_num(j, "hi", where),
                                       p);
  }
  if (t == "super_level") {
    io::check_keys(j, {"type", "phi", "level", "lo", "hi"}, where);
    return ConvexDomainFamily::super_level(joint_from_json(io::req(j, "phi", where), where + ".phi"),
                                           io::get_num(j, "level", where), io::get_num(j, "lo", where),
                                           io::get_num(j, "hi", where));
  }
  fail(ErrorCode::BadConfig, where + ".type: unknown family '" + t + "'");
}

// ---------------------------------------------------------------------------
// Polynomials and potentials

inline json to_json(const Polynomial& p) {
  json t = json::array();
  for (const auto& k : p.terms()) {
    json e = json::array();
    for (int i = 0; i < p.dim(); ++i) e.push_back(k.e[i]);
    t.push_back({{"c", num(k.c)}, {"e", e}});
  }
  return {{"n", p.dim()}, {"terms", t}};
}

inline Polynomial polynomial_from_json(const json& j, const std::string& where = "u") {
  io::check_keys(j, {"n", "terms"}, where);
  int n = io::get_dim(j, where);
  std::vector<Polynomial::Term> terms;
  const json& a = io::req(j, "terms", where);
  if (!a.is_array()) fail(ErrorCode::BadConfig, where + ".terms: expected an array");
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::string w = where + ".terms[" + std::to_string(i) + "]";
    io::check_keys(a[i], {"c", "e"}, w);
    Polynomial::Term t{io::get_num(a[i], "c", w), {0, 0, 0}};
    const json& e = io::req(a[i], "e", w);
    if (!e.is_array() || static_cast<int>(e.size()) != n) fail(ErrorCode::BadConfig, w + ".e: needs n exponents");
    for (int d = 0; d < n; ++d) {
      if (!e[d].is_number_integer() || e[d].get<int>() < 0) fail(ErrorCode::BadConfig, w + ".e: bad exponent");
      t.e[d] = e[d].get<int>();
    }
    terms.push_back(t);
  }
  return Polynomial(n, terms);
}

inline json to_json(const EvenConvexPotential& v) {
  json q = json::array(), r = json::array();
  for (const auto& x : v.quadratics()) q.push_back({{"c", num(x.c)}, {"a", io::mat_json(x.a)}});
  for (const auto& x : v.ridges()) r.push_back({{"d", num(x.d)}, {"v", io::vec_json(x.v)}, {"p", num(x.p)}});
  return {{"n", v.dim()}, {"quadratics", q}, {"ridges", r}};
}

inline EvenConvexPotential potential_from_json(const json& j, const std::string& where = "potential") {
  io::check_keys(j, {"n", "quadratics", "ridges"}, where);
  int n = io::get_dim(j, where);
  std::vector<EvenConvexPotential::Quadratic> q;
  std::vector<EvenConvexPotential::Ridge> r;
  if (j.contains("quadratics")) {
    for (std::size_t i = 0; i < j["quadratics"].size(); ++i) {
      const json& x = j["quadratics"][i];
      std::string w = where + ".quadratics[" + std::to_string(i) + "]";
      io::check_keys(x, {"c", "a"}, w);
      Mat a = io::mat_from(io::req(x, "a", w), w + ".a");
      if (a.rows() != n) fail(ErrorCode::GridMismatch, w + ".a: size differs from n");
      q.push_back({io::get_num(x, "c", w), a});
    }
  }
  if (j.contains("ridges")) {
    for (std::size_t i = 0; i < j["ridges"].size(); ++i) {
      const json& x = j["ridges"][i];
      std::string w = where + ".ridges[" + std::to_string(i) + "]";
      io::check_keys(x, {"d", "v", "p"}, w);
      Vec v = io::vec_from(io::req(x, "v", w), w + ".v");
      if (v.size() != n) fail(ErrorCode::GridMismatch, w + ".v: size differs from n");
      r.push_back({io::get_num(x, "d", w), v, io::get_num(x, "p", w)});
    }
  }
  return EvenConvexPotential(n, q, r);
}

inline json to_json(const JointPotential& v) {
  if (auto* b = std::get_if<JointPotential::BProfile>(&v.rule())) return {{"type", "b_profile"}, {"v0", to_json(b->v0)}};
  const auto& c = std::get<JointPotential::Coupled>(v.rule());
  json pairs = json::array();
  for (const auto& p : c.pairs)
    pairs.push_back({{"d", num(p.d)}, {"s", num(p.s)}, {"v", io::vec_json(p.v)}, {"q", num(p.q)}});
  return {{"type", "coupled"}, {"n", v.dim()}, {"a", num(c.a)}, {"p", num(c.p)}, {"q", io::mat_json(c.q)},
          {"pairs", pairs}};
}

inline JointPotential joint_potential_from_json(const json& j, const std::string& where = "potential") {
  std::string t = io::get_str(j, "type", where);
  if (t == "b_profile") {
    io::check_keys(j, {"type", "v0"}, where);
    return JointPotential::b_profile(potential_from_json(io::req(j, "v0", where), where + ".v0"));
  }
  if (t != "coupled") fail(ErrorCode::BadConfig, where + ".type: unknown potential '" + t + "'");
  io::check_keys(j, {"type", "n", "a", "p", "q", "pairs"}, where);
  int n = io::get_dim(j, where);
  JointPotential::Coupled c;
  c.a = io::get_num(j, "a", where, 0.0);
  c.p = io::get_num(j, "p", where, 0.0);
  if (j.contains("q")) {
    c.q = io::mat_from(j["q"], where + ".q");
    if (c.q.rows() != n) fail(ErrorCode::GridMismatch, where + ".q: size differs from n");
  }
  if (j.contains("pairs")) {
    for (std::size_t i = 0; i < j["pairs"].size(); ++i) {
      const json& x = j["pairs"][i];
      std::string w = where + ".pairs[" + std::to_string(i) + "]";
      io::check_keys(x, {"d", "s", "v", "q"}, w);
      Vec v = io::vec_from(io::req(x, "v", w), w + ".v");
      if (v.size() != n) fail(ErrorCode::GridMismatch, w + ".v: size differs from n");
      c.pairs.push_back({io::get_num(x, "d", w), io::get_num(x, "s", w), v, io::get_num(x, "q", w)});
    }
  }
  return JointPotential::coupled(n, c);
}

// ---------------------------------------------------------------------------

inline json to_json(const QuadratureSpec& q) {
  return {{"mode", q.mode == QuadMode::Polar ? "polar" : "mc"},
          {"radial_order", q.radial_order},
          {"angular", q.angular},
          {"azimuthal", q.azimuthal},
          {"polar", q.polar},
          {"mc_samples", q.mc_samples},
          {"seed", q.seed},
          {"stream", q.stream}};
}

inline QuadratureSpec quadrature_from_json(const json& j, const std::string& where = "quadrature") {
  io::check_keys(j, {"mode", "radial_order", "angular", "azimuthal", "polar", "mc_samples", "seed", "stream"}, where);
  QuadratureSpec q;
  if (j.contains("mode")) {
    std::string m = io::get_str(j, "mode", where);
    if (m == "polar") q.mode = QuadMode::Polar;
    else if (m == "mc") q.mode = QuadMode::MonteCarlo;
    else fail(ErrorCode::BadConfig, where + ".mode: expected 'polar' or 'mc'");
  }
  q.radial_order = io::get_int(j, "radial_order", where, q.radial_order);
  q.angular = io::get_int(j, "angular", where, q.angular);
  q.azimuthal = io::get_int(j, "azimuthal", where, q.azimuthal);
  q.polar = io::get_int(j, "polar", where, q.polar);
  if (j.contains("mc_samples")) q.mc_samples = j["mc_samples"].get<std::size_t>();
  if (j.contains("seed")) q.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("stream")) q.stream = j["stream"].get<std::uint64_t>();
  try {
    q.validate();
  } catch (const Error& e) {
    fail(ErrorCode::BadConfig, where + ": " + e.what());
  }
  return q;
}

}  // namespace bmlab
