#pragma once

// Seeded random instances for the named checks and a min-margin sweep.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "checks.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace bmlab {

struct Range {
  double lo = 0.0, hi = 1.0;
};

struct InstanceSpec {
  std::string target = "dim_bm";
  int n = 1;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  // measure family: "gaussian", "lebesgue", "power", "heavy_tail", "admissible" (random), "product"
  std::string measure;
  std::map<std::string, Range> ranges;
  int points = 21;  // profile grids
  QuadratureSpec quad;

  Range range(const std::string& key, Range dflt) const {
    auto it = ranges.find(key);
    return it == ranges.end() ? dflt : it->second;
  }
  void validate() const {
    if (n < 1 || n > 3) fail(ErrorCode::BadConfig, "search.n: dimension must be 1, 2 or 3");
    if (count < 1) fail(ErrorCode::BadConfig, "search.count: must be >= 1");
    if (points < 3) fail(ErrorCode::BadConfig, "search.points: need at least 3");
    for (const auto& [k, r] : ranges)
      if (!(r.lo <= r.hi)) fail(ErrorCode::BadConfig, "search.ranges." + k + ": empty range");
    bool known = false;
    for (const auto& s : check_names()) known = known || s == target;
    if (!known || target == "lift") fail(ErrorCode::BadConfig, "search.target: unknown or unsupported '" + target + "'");
  }
};

inline json to_json(const InstanceSpec& s) {
  json r = json::object();
  for (const auto& [k, v] : s.ranges) r[k] = json::array({num(v.lo), num(v.hi)});
  return {{"target", s.target}, {"n", s.n},           {"count", s.count},   {"seed", s.seed},
          {"measure", s.measure}, {"ranges", r}, {"points", s.points}, {"quadrature", to_json(s.quad)}};
}

inline InstanceSpec instance_spec_from_json(const json& j, const std::string& where = "search") {
  io::check_keys(j, {"target", "n", "count", "seed", "measure", "ranges", "points", "quadrature"}, where);
  InstanceSpec s;
  s.target = io::get_str(j, "target", where);
  s.n = io::get_dim(j, where);
  if (j.contains("count")) {
    if (!j["count"].is_number_unsigned()) fail(ErrorCode::BadConfig, where + ".count: expected a positive integer");
    s.count = j["count"].get<std::size_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(ErrorCode::BadConfig, where + ".seed: expected an unsigned integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("measure")) s.measure = io::get_str(j, "measure", where);
  if (j.contains("ranges")) {
    for (const auto& [k, v] : j["ranges"].items()) {
      if (!v.is_array() || v.size() != 2) fail(ErrorCode::BadConfig, where + ".ranges." + k + ": expected [lo, hi]");
      s.ranges[k] = {num(v[0]), num(v[1])};
    }
  }
  s.points = io::get_int(j, "points", where, s.points);
  if (j.contains("quadrature")) s.quad = quadrature_from_json(j["quadrature"], where + ".quadrature");
  s.validate();
  return s;
}

namespace gen {

inline double draw(Stream& rng, Range r) { return rng.uniform(r.lo, r.hi); }

// Random SPD-ish matrix M M^T + eps I, scaled to unit spectral radius.
inline Mat spd(Stream& rng, int n, double eps) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = rng.normal();
  Mat a = m * m.transpose() + eps * Mat::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return a / es.eigenvalues()(n - 1);
}

inline WeightedMeasure measure(Stream& rng, int n, const std::string& kind, bool smooth = false) {
  std::string k = kind.empty() ? "gaussian" : kind;
  if (k == "admissible") {
    const char* opts[] = {"lebesgue", "gaussian", "power", "heavy_tail"};
    k = opts[rng.integer(0, 3)];
  }
  auto power = [&] { return RadialWeight::power(smooth ? rng.uniform(2.0, 4.0) : rng.uniform(1.0, 4.0)); };
  if (k == "lebesgue") return WeightedMeasure::lebesgue(n);
  if (k == "gaussian") return WeightedMeasure::gaussian(n);
  if (k == "power") return {n, power()};
  if (k == "heavy_tail") {
    double a = smooth ? 2.0 : rng.uniform(1.0, 3.0);
    return {n, RadialWeight::heavy_tail(a, rng.uniform(3.5, 6.0) / a)};
  }
  if (k == "product") {
    ProductWeight p;
    for (int i = 0; i < n; ++i)
      p.factors.push_back(rng.uniform() < 0.5 ? RadialWeight::gaussian() : RadialWeight::power(rng.uniform(2.0, 4.0)));
    return WeightedMeasure(p);
  }
  fail(ErrorCode::BadConfig, "search.measure: unknown family '" + kind + "'");
}

// Symmetric polygon from 2-3 random generators and their negatives.
inline SymmetricBody polygon(Stream& rng, double size) {
  std::vector<Vec> v;
  int m = rng.integer(2, 3);
  double base = rng.uniform(0.0, pi / m);
  for (int i = 0; i < m; ++i) {
    double a = base + pi * (i + rng.uniform(0.15, 0.85)) / m;
    double r = size * rng.uniform(0.6, 1.0);
    v.push_back(make_vec({r * std::cos(a), r * std::sin(a)}));
  }
  return SymmetricBody::polygon(v);
}

enum class Kind { Ball, Box, Polygon, Ellipsoid };

inline SymmetricBody body(Stream& rng, int n, Kind kind, Range size) {
  if (n == 1) return SymmetricBody::interval(draw(rng, size));
  std::vector<double> a(n);
  switch (kind) {
    case Kind::Ball: return SymmetricBody::ball(n, draw(rng, size));
    case Kind::Polygon:
      if (n == 2) return polygon(rng, draw(rng, size));
      [[fallthrough]];
    case Kind::Box:
      for (auto& x : a) x = draw(rng, size);
      return SymmetricBody::box(a);
    case Kind::Ellipsoid:
      for (auto& x : a) x = draw(rng, size);
      return SymmetricBody::ellipsoid(a);
  }
  return SymmetricBody::ball(n, 1.0);
}

// Two bodies of the same shape class, so the combination stays cheap.
inline std::pair<SymmetricBody, SymmetricBody> body_pair(Stream& rng, int n, Range size, bool polygons = true) {
  Kind k = Kind::Ball;
  if (n >= 2) k = static_cast<Kind>(rng.integer(0, polygons && n == 2 ? 2 : 1));
  auto a = body(rng, n, k, size);
  auto b = body(rng, n, k, size);
  return {a, b};
}

inline SymmetricBody any_body(Stream& rng, int n, Range size) {
  if (n == 1) return body(rng, n, Kind::Ball, size);
  const Kind two[] = {Kind::Ball, Kind::Box, Kind::Polygon, Kind::Ellipsoid};
  const Kind three[] = {Kind::Ball, Kind::Box, Kind::Ellipsoid};
  return body(rng, n, n == 2 ? two[rng.integer(0, 3)] : three[rng.integer(0, 2)], size);
}

// Even concave cap, nonnegative on the ball of radius R.
inline ConcaveFunction cap(Stream& rng, int n, double R, bool strict = false) {
  int kind = strict ? 1 : rng.integer(0, 4);
  double c = rng.uniform(0.5, 2.0);
  double room = c * rng.uniform(0.2, 1.0);  // drop over the ball
  switch (kind) {
    case 0: return ConcaveFunction::constant(n, c);
    case 1: return ConcaveFunction::quadratic(c, spd(rng, n, 0.2) * (room / (R * R)));
    case 2: return ConcaveFunction::isotropic(n, c, room / (R * R));
    case 3: {
      double p = rng.uniform(1.0, 3.0);
      return ConcaveFunction::power(n, c, room / std::pow(R, p), p);
    }
    default: {
      double p = rng.uniform(1.0, 3.0);
      std::vector<Cap> parts = {QuadraticCap{c, room / (R * R) * spd(rng, n, 0.2)},
                                PowerCap{c * rng.uniform(0.8, 1.2), 0.8 * room / std::pow(R, p), p}};
      return ConcaveFunction::min_of(n, parts);
    }
  }
}

inline EvenConvexPotential potential(Stream& rng, int n, bool quadratic, double pmin) {
  std::vector<EvenConvexPotential::Quadratic> q;
  std::vector<EvenConvexPotential::Ridge> r;
  if (quadratic || rng.uniform() < 0.5) q.push_back({rng.uniform(0.1, 1.0), spd(rng, n, 0.1)});
  int m = rng.integer(0, 2);
  for (int i = 0; i < m; ++i) r.push_back({rng.uniform(0.0, 0.5), rng.sphere(n), rng.uniform(pmin, 4.0)});
  return {n, q, r};
}

// All monomials of the given total degrees, random coefficients.
inline Polynomial polynomial(Stream& rng, int n, const std::vector<int>& degrees, double scale) {
  std::vector<Polynomial::Term> t;
  for (int d : degrees)
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        int c = d - a - b;
        std::array<int, 3> e{a, b, c};
        if ((n < 2 && b > 0) || (n < 3 && c > 0)) continue;
        t.push_back({scale * rng.normal(), e});
      }
  return {n, t};
}

inline json grid_json(double lo, double hi, int points) { return {{"lo", num(lo)}, {"hi", num(hi)}, {"points", points}}; }

}  // namespace gen

// The instance for (seed, index): a pure function of the spec and the index.
inline json random_instance(const InstanceSpec& s, std::size_t index) {
  if (index >= s.count) fail(ErrorCode::OutOfRange, "index must be < count");
  Stream rng(s.seed, index);
  const int n = s.n;
  const Range size = s.range("size", {0.4, 1.6});
  const Range lam = s.range("lambda", {0.1, 0.9});
  const Range beta = s.range("beta", {0.5, 3.0});
  json inst;
  const std::string& t = s.target;
  if (t == "dim_bm") {
    auto [k, l] = gen::body_pair(rng, n, size);
    double R = std::max(k.bounding_radius(), l.bounding_radius());
    inst = {{"k", to_json(k)},
            {"l", to_json(l)},
            {"lambda", num(gen::draw(rng, lam))},
            {"phi", to_json(gen::cap(rng, n, R))},
            {"beta", num(gen::draw(rng, beta))},
            {"measure", to_json(gen::measure(rng, n, s.measure))}};
  } else if (t == "bbl") {
    double kappa = gen::draw(rng, s.range("kappa", {0.0, 0.0}));
    double lambda = gen::draw(rng, lam);
    Vec m1(n), m2(n);
    for (int i = 0; i < n; ++i) m1(i) = rng.uniform(-1.0, 1.0), m2(i) = rng.uniform(-1.0, 1.0);
    Vec mc = lambda * m1 + (1.0 - lambda) * m2;
    BblInstance b;
    b.kappa = kappa;
    b.lambda = lambda;
    b.mu = WeightedMeasure::lebesgue(n);
    bool slack = rng.uniform() < 0.5;
    if (kappa == 0.0 && rng.uniform() < 0.5) {
      // gaussians: the sup-convolution has precision 1 / (lambda/p1 + (1-lambda)/p2)
      double a1 = rng.uniform(0.5, 2.0), a2 = rng.uniform(0.5, 2.0);
      double p1 = rng.uniform(0.5, 4.0), p2 = rng.uniform(0.5, 4.0);
      if (rng.uniform() < 0.3) p2 = p1;  // equality case of Prekopa-Leindler
      double ph = 1.0 / (lambda / p1 + (1.0 - lambda) / p2);
      double ah = std::pow(a1, lambda) * std::pow(a2, 1.0 - lambda);
      if (slack) ah *= rng.uniform(1.0, 1.3), ph *= rng.uniform(0.7, 1.0);
      b.f = BblField::gaussian(m1, a1, p1);
      b.g = BblField::gaussian(m2, a2, p2);
      b.h = BblField::gaussian(mc, ah, ph);
    } else {
      // ball indicators: h is the indicator of the Minkowski combination
      double r1 = gen::draw(rng, size), r2 = gen::draw(rng, size);
      double rh = lambda * r1 + (1.0 - lambda) * r2;
      if (slack) rh *= rng.uniform(1.0, 1.2);
      b.f = BblField::indicator(m1, r1);
      b.g = BblField::indicator(m2, r2);
      b.h = BblField::indicator(mc, rh);
    }
    inst = to_json(b);
  } else if (t == "hereditary" || t == "spectral") {
    std::string kind = s.measure.empty() ? "admissible" : s.measure;
    auto mu = gen::measure(rng, n, kind, true);
    bool finite = !mu.is_radial() || mu.weight().name() == "gaussian" || mu.weight().name() == "power";
    json nu = json::object();
    double roll = rng.uniform();
    if (finite && roll < 0.15) {
      nu = json::object();  // nu = mu, the degenerate case
    } else {
      bool heavy = mu.is_radial() && !finite && !mu.is_lebesgue();
      nu["potential"] = to_json(gen::potential(rng, n, !finite || heavy, 2.0));
      if (roll > 0.6 || (mu.is_lebesgue() && roll > 0.3)) nu["radius"] = num(gen::draw(rng, size) * 1.5);
    }
    inst = {{"measure", to_json(mu)}, {"nu", nu}, {"u", to_json(gen::polynomial(rng, n, {2, 4}, 0.5))}};
  } else if (t == "negative_exponent") {
    auto [k, l] = gen::body_pair(rng, n, size);
    double c = rng.uniform(0.8, 1.5);
    RadialPoly p{c, rng.uniform(-0.5, 0.5), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.0, 0.0};
    inst = {{"family", to_json(ConvexDomainFamily::minkowski(k, l))},
            {"phi", to_json(JointFunction::radial_poly(n, p))},
            {"measure", to_json(gen::measure(rng, n, s.measure))},
            {"beta", num(n + gen::draw(rng, s.range("beta_excess", {0.25, 3.0})))},
            {"grid", gen::grid_json(0.0, 1.0, std::min(s.points, 9))}};
  } else if (t == "brascamp_lieb") {
    inst = {{"n", n},
            {"g", to_json(gen::potential(rng, n, true, 2.0))},
            {"f", to_json(gen::polynomial(rng, n, {1, 2, 3}, 0.5))}};
  } else if (t == "b_local") {
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = rng.normal();
    inst = {{"potential", to_json(gen::potential(rng, n, false, 1.0))}, {"d", io::vec_json(d)}};
  } else if (t == "torsion_bm") {
    auto mu = s.measure.empty() ? WeightedMeasure::lebesgue(n) : gen::measure(rng, n, s.measure);
    gen::Kind kind = gen::Kind::Ball;
    if (n == 2 && mu.is_lebesgue() && rng.uniform() < 0.5) kind = gen::Kind::Box;
    auto k = gen::body(rng, n, kind, size);
    auto l = gen::body(rng, n, kind, size);
    inst = {{"k", to_json(k)}, {"l", to_json(l)}, {"lambda", num(gen::draw(rng, lam))}, {"measure", to_json(mu)}};
  } else if (t == "poincare") {
    auto c = gen::any_body(rng, n, size);
    std::string kind = s.measure.empty() ? "admissible" : s.measure;
    inst = {{"body", to_json(c)},
            {"phi", to_json(gen::cap(rng, n, c.bounding_radius(), true))},
            {"beta", num(gen::draw(rng, beta))},
            {"measure", to_json(gen::measure(rng, n, kind))},
            {"f", to_json(gen::polynomial(rng, n, {2, 4}, 0.5))}};
  } else if (t == "concavity") {
    std::string kind = s.measure.empty() ? "admissible" : s.measure;
    auto mu = gen::measure(rng, n, kind);
    json fam;
    double lo = 0.0, hi = 1.0;
    double R = 1.0;
    if (rng.uniform() < 0.5) {
      auto [k, l] = gen::body_pair(rng, n, size);
      R = std::max(k.bounding_radius(), l.bounding_radius());
      fam = to_json(ConvexDomainFamily::minkowski(k, l));
    } else {
      RadiusProfile p{RadiusProfile::Quadric, rng.uniform(0.8, 1.6), rng.uniform(-0.5, 0.5), rng.uniform(0.2, 1.0)};
      lo = -0.6;
      hi = 0.6;
      R = std::sqrt(p.c0 + 0.5);
      fam = to_json(ConvexDomainFamily::profile(n, lo, hi, p));
    }
    json phi;
    if (rng.uniform() < 0.5) {
      phi = to_json(JointFunction::frozen(gen::cap(rng, n, R)));
    } else {
      RadialPoly p{rng.uniform(1.0, 2.0), rng.uniform(-0.5, 0.5), -rng.uniform(0.0, 1.0), -rng.uniform(0.0, 1.0),
                   -rng.uniform(0.0, 0.3), 0.0};
      phi = to_json(JointFunction::radial_poly(n, p));
    }
    json prob = {{"family", fam}, {"phi", phi}, {"measure", to_json(mu)}, {"beta", num(gen::draw(rng, beta))}};
    inst = {{"problem", prob}, {"grid", gen::grid_json(lo, hi, s.points)}};
  } else if (t == "b_profile") {
    std::string kind = s.measure.empty() ? "admissible" : s.measure;
    auto k = gen::any_body(rng, n, size);
    auto mu = gen::measure(rng, n, kind);
    inst = {{"body", to_json(k)}, {"measure", to_json(mu)}, {"grid", gen::grid_json(-1.0, 1.0, std::min(s.points, 9))}};
  } else if (t == "log_marginal") {
    JointPotential::Coupled c;
    c.a = rng.uniform(0.2, 1.0);
    c.q = gen::spd(rng, n, 0.2);
    int m = rng.integer(0, 2);
    for (int i = 0; i < m; ++i) c.pairs.push_back({rng.uniform(0.0, 0.3), rng.uniform(-1.0, 1.0), rng.sphere(n), 2.0});
    inst = {{"potential", to_json(JointPotential::coupled(n, c))},
            {"measure", to_json(gen::measure(rng, n, s.measure.empty() ? "gaussian" : s.measure))},
            {"kappa", 0.0},
            {"grid", gen::grid_json(-1.0, 1.0, std::min(s.points, 9))}};
  } else {
    fail(ErrorCode::BadConfig, "no random generator for target '" + t + "'");
  }
  return {{"target", t}, {"instance", inst}};
}

struct SearchEntry {
  std::size_t index = 0;
  double margin = 0.0;
  double tolerance = 0.0;
  std::string verdict;
  bool theorem = true;
  std::string error;  // nonempty if the instance raised
};

struct SearchReport {
  std::string target;
  std::uint64_t seed = 0;
  std::size_t total = 0;
  double min_margin = inf, max_margin = -inf;
  std::size_t argmin_index = 0;
  json argmin = json::object();         // replayable: {"target", "instance"}
  json argmin_report = json::object();  // CheckReport of the argmin
  std::vector<std::size_t> histogram;   // 64 bins over [min, max]
  std::size_t escalations = 0;          // theorem-status margins below -tolerance
  std::size_t errors = 0;
  bool exploratory = false;
  QuadratureSpec quad;
  std::vector<SearchEntry> entries;
};

inline constexpr int histogram_bins = 64;

inline json to_json(const SearchReport& r) {
  json h = json::array();
  for (auto c : r.histogram) h.push_back(c);
  json e = json::array();
  for (const auto& x : r.entries) {
    json row = {{"index", x.index}, {"margin", num(x.margin)}, {"tolerance", num(x.tolerance)},
                {"verdict", x.verdict}, {"theorem", x.theorem}};
    if (!x.error.empty()) row["error"] = x.error;
    e.push_back(row);
  }
  return {{"target", r.target},
          {"seed", r.seed},
          {"total", r.total},
          {"min_margin", num(r.min_margin)},
          {"max_margin", num(r.max_margin)},
          {"argmin_index", r.argmin_index},
          {"argmin", r.argmin},
          {"argmin_report", r.argmin_report},
          {"histogram", {{"lo", num(r.min_margin)}, {"hi", num(r.max_margin)}, {"counts", h}}},
          {"escalations", r.escalations},
          {"errors", r.errors},
          {"exploratory", r.exploratory},
          {"quadrature", to_json(r.quad)},
          {"entries", e}};
}

inline SearchReport search_report_from_json(const json& j) {
  SearchReport r;
  r.target = j.at("target").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.total = j.at("total").get<std::size_t>();
  r.min_margin = num(j.at("min_margin"));
  r.max_margin = num(j.at("max_margin"));
  r.argmin_index = j.at("argmin_index").get<std::size_t>();
  r.argmin = j.at("argmin");
  r.argmin_report = j.at("argmin_report");
  for (const auto& c : j.at("histogram").at("counts")) r.histogram.push_back(c.get<std::size_t>());
  r.escalations = j.at("escalations").get<std::size_t>();
  r.errors = j.at("errors").get<std::size_t>();
  r.exploratory = j.at("exploratory").get<bool>();
  r.quad = quadrature_from_json(j.at("quadrature"));
  for (const auto& x : j.at("entries")) {
    SearchEntry e;
    e.index = x.at("index").get<std::size_t>();
    e.margin = num(x.at("margin"));
    e.tolerance = num(x.at("tolerance"));
    e.verdict = x.at("verdict").get<std::string>();
    e.theorem = x.at("theorem").get<bool>();
    if (x.contains("error")) e.error = x["error"].get<std::string>();
    r.entries.push_back(e);
  }
  return r;
}

// Per-instance quadrature: MC streams are keyed by (seed, index).
inline CheckOptions instance_options(const InstanceSpec& s, std::size_t index) {
  CheckOptions o;
  o.quad = s.quad;
  o.quad.seed = s.seed;
  o.quad.stream = index;
  o.seed = s.seed ^ (0x9E3779B97F4A7C15ull * (index + 1));
  return o;
}

// Re-evaluates a {"target", "instance"} record.
inline CheckReport replay(const json& rec, const CheckOptions& o) {
  io::check_keys(rec, {"target", "instance", "options"}, "argmin");
  CheckOptions opt = o;
  if (rec.contains("options")) {
    const json& x = rec["options"];
    io::check_keys(x, {"quadrature", "seed"}, "argmin.options");
    if (x.contains("quadrature")) opt.quad = quadrature_from_json(x["quadrature"], "argmin.options.quadrature");
    if (x.contains("seed")) opt.seed = x["seed"].get<std::uint64_t>();
  }
  return run_check(io::get_str(rec, "target", "argmin"), io::req(rec, "instance", "argmin"), opt);
}

inline SearchReport search_min_margin(const InstanceSpec& s, int jobs = 1) {
  s.validate();
  std::vector<SearchEntry> slots(s.count);
  std::vector<json> instances(s.count);
  parallel_for(s.count, jobs, [&](std::size_t i) {
    SearchEntry& e = slots[i];
    e.index = i;
    instances[i] = random_instance(s, i);
    try {
      auto r = run_check(s.target, instances[i]["instance"], instance_options(s, i));
      e.margin = r.margin;
      e.tolerance = r.tolerance;
      e.verdict = to_string(r.verdict);
      e.theorem = r.theorem;
    } catch (const Error& err) {
      e.margin = std::numeric_limits<double>::quiet_NaN();
      e.verdict = "error";
      e.error = err.what();
    }
  });
  SearchReport r;
  r.target = s.target;
  r.seed = s.seed;
  r.total = s.count;
  r.quad = s.quad;
  bool any_theorem = false;
  for (const auto& e : slots) {
    if (!e.error.empty()) {
      ++r.errors;
      continue;
    }
    any_theorem = any_theorem || e.theorem;
    if (e.theorem && e.margin < -e.tolerance) ++r.escalations;
    if (e.margin < r.min_margin) r.min_margin = e.margin, r.argmin_index = e.index;
    r.max_margin = std::max(r.max_margin, e.margin);
  }
  r.exploratory = !any_theorem;
  r.histogram.assign(histogram_bins, 0);
  if (r.errors < s.count) {
    double w = r.max_margin - r.min_margin;
    for (const auto& e : slots) {
      if (!e.error.empty()) continue;
      int b = w > 0.0 ? static_cast<int>((e.margin - r.min_margin) / w * histogram_bins) : 0;
      ++r.histogram[std::clamp(b, 0, histogram_bins - 1)];
    }
    CheckOptions o = instance_options(s, r.argmin_index);
    r.argmin = instances[r.argmin_index];
    r.argmin["options"] = {{"quadrature", to_json(o.quad)}, {"seed", o.seed}};
    r.argmin_report = to_json(replay(r.argmin, o));
  }
  r.entries = std::move(slots);
  return r;
}

}  // namespace bmlab
