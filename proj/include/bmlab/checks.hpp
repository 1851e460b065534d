#pragma once

// Named checks driven by JSON instances. The same instance format is used by
// `bmlab check <name>` configs and by the search harness, so any argmin can be
// replayed through run_check.

#include <string>
#include <vector>

#include "inequalities.hpp"
#include "marginals.hpp"
#include "serialize.hpp"
#include "variation.hpp"

namespace bmlab {

inline MarginalProblem problem_from_json(const json& j, const std::string& where = "problem") {
  io::check_keys(j, {"family", "phi", "measure", "beta", "gamma"}, where);
  MarginalProblem p;
  p.family = family_from_json(io::req(j, "family", where), where + ".family");
  int n = p.family.dim();
  p.phi = j.contains("phi") ? joint_from_json(j["phi"], where + ".phi")
                            : JointFunction::frozen(ConcaveFunction::constant(n, 1.0));
  p.mu = j.contains("measure") ? measure_from_json(j["measure"], where + ".measure") : WeightedMeasure::lebesgue(n);
  p.beta = io::get_num(j, "beta", where, 1.0);
  if (!(p.beta > 0)) fail(ErrorCode::BadConfig, where + ".beta: must be positive");
  if (j.contains("gamma")) p.gamma = io::get_num(j, "gamma", where);
  if (p.phi.dim() != n || p.mu.dim() != n) fail(ErrorCode::BadConfig, where + ": dimension mismatch");
  return p;
}

inline json to_json(const MarginalProblem& p) {
  json j = {{"family", to_json(p.family)}, {"phi", to_json(p.phi)}, {"measure", to_json(p.mu)}, {"beta", num(p.beta)}};
  if (p.gamma) j["gamma"] = num(*p.gamma);
  return j;
}

// {"lo", "hi", "points"}
inline std::vector<double> grid_from_json(const json& j, const std::string& where) {
  io::check_keys(j, {"lo", "hi", "points"}, where);
  int m = io::get_int(j, "points", where, 21);
  if (m < 3) fail(ErrorCode::BadConfig, where + ".points: need at least 3");
  double lo = io::get_num(j, "lo", where), hi = io::get_num(j, "hi", where);
  if (!(lo < hi)) fail(ErrorCode::BadConfig, where + ": need lo < hi");
  return uniform_grid(lo, hi, m);
}

// A scalar field given either as a polynomial ("terms") or an even convex potential.
inline Field field_from_json(const json& j, const std::string& where) {
  if (j.contains("terms")) return polynomial_from_json(j, where).field();
  return potential_from_json(j, where).field();
}

inline EvenDensity even_density_from_json(const json& j, int n, const std::string& where) {
  io::check_keys(j, {"potential", "radius"}, where);
  EvenDensity d;
  d.u = j.contains("potential") ? potential_from_json(j["potential"], where + ".potential") : EvenConvexPotential::zero(n);
  if (j.contains("radius")) {
    d.radius = io::get_num(j, "radius", where);
    if (!(*d.radius > 0)) fail(ErrorCode::BadConfig, where + ".radius: must be positive");
  }
  if (d.u.dim() != n) fail(ErrorCode::BadConfig, where + ": dimension mismatch");
  return d;
}

inline json to_json(const EvenDensity& d) {
  json j = {{"potential", to_json(d.u)}};
  if (d.radius) j["radius"] = num(*d.radius);
  return j;
}

struct CheckOptions {
  QuadratureSpec quad;
  int jobs = 1;
  std::uint64_t seed = 0;
};

namespace detail {

inline CheckReport from_profile(const std::string& name, const ProfileReport& p, bool concave, json witness) {
  CheckReport r;
  r.name = name;
  if (concave) {
    r.margin = -p.max_d2;
    r.verdict = p.verdict;
  } else {
    r.margin = p.min_d2;
    r.verdict = judge(r.margin, p.tolerance, false);
  }
  r.tolerance = p.tolerance;
  r.witness = std::move(witness);
  r.details = p.details;
  r.details["min_d2"] = p.min_d2;
  r.details["argmin"] = p.argmin;
  r.details["max_d2"] = p.max_d2;
  r.details["argmax"] = p.argmax;
  return r;
}

inline void require_dim(bool ok, const std::string& where) {
  if (!ok) fail(ErrorCode::BadConfig, where + ": dimension mismatch");
}

// phi(t) = (int_{Omega_t} Phi(t,.)^{-beta} dmu)^{-1/(beta-n)}, Phi positive and convex.
inline CheckReport negative_exponent_check(const json& j, const CheckOptions& o) {
  const std::string w = "instance";
  io::check_keys(j, {"family", "phi", "measure", "beta", "grid"}, w);
  auto fam = family_from_json(io::req(j, "family", w), w + ".family");
  const int n = fam.dim();
  auto phi = joint_from_json(io::req(j, "phi", w), w + ".phi");
  auto mu = j.contains("measure") ? measure_from_json(j["measure"], w + ".measure") : WeightedMeasure::gaussian(n);
  double beta = io::get_num(j, "beta", w);
  if (!(beta > n)) fail(ErrorCode::BadConfig, w + ".beta: must exceed n");
  require_dim(phi.dim() == n && mu.dim() == n, w);
  auto grid = j.contains("grid") ? grid_from_json(j["grid"], w + ".grid") : uniform_grid(fam.t_lo(), fam.t_hi(), 9);
  auto eval = [&](double t) {
    Sample s;
    SymmetricBody k = fam.section(t);
    if (k.is_empty()) return s;
    IntegrateOptions opt;
    opt.rotation_invariant = phi.is_radial() && fam.radius(t).has_value();
    auto m = integrate_body(
        k,
        [&](const Vec& x) {
          double p = phi.value(t, x);
          if (!(p > 0.0)) fail(ErrorCode::NotPositive, "Phi must be positive");
          return std::pow(p, -beta);
        },
        mu, o.quad, opt);
    if (!(m.value > 0.0)) return s;
    double g = -1.0 / (beta - n);
    s.ok = true;
    s.v = std::pow(m.value, g);
    s.err = std::abs(std::pow(m.value + m.error, g) - s.v);
    return s;
  };
  auto p = second_differences(grid, eval, o.jobs, 1e-14);
  auto r = from_profile("negative_exponent", p, false, j);
  r.theorem = false;
  return r;
}

}  // namespace detail

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "dim_bm",     "bbl",      "b_local",     "brascamp_lieb", "poincare",  "torsion_bm",       "lift",
      "hereditary", "spectral", "concavity",   "b_profile",     "log_marginal", "negative_exponent"};
  return names;
}

// Evaluates the named check on a JSON instance. The witness of the report is
// the instance itself.
inline CheckReport run_check(const std::string& name, const json& j, const CheckOptions& o = {}) {
  const std::string w = "instance";
  CheckReport r;
  if (name == "dim_bm") {
    r = dim_bm_check(dim_bm_from_json(j, w), o.quad);
  } else if (name == "bbl") {
    BblOptions bo;
    bo.quad = o.quad;
    bo.seed = o.seed;
    r = bbl_check(bbl_instance_from_json(j, w), bo);
  } else if (name == "b_local") {
    io::check_keys(j, {"potential", "d"}, w);
    auto v = potential_from_json(io::req(j, "potential", w), w + ".potential");
    r = b_local_margin(v, io::vec_from(io::req(j, "d", w), w + ".d"), o.quad);
  } else if (name == "brascamp_lieb") {
    io::check_keys(j, {"n", "g", "f", "radius"}, w);
    int n = io::get_dim(j, w);
    Field g = field_from_json(io::req(j, "g", w), w + ".g");
    Field f = field_from_json(io::req(j, "f", w), w + ".f");
    std::optional<double> R;
    if (j.contains("radius")) R = io::get_num(j, "radius", w);
    r = brascamp_lieb_margin(g, n, f, o.quad, R);
  } else if (name == "poincare") {
    io::check_keys(j, {"body", "phi", "beta", "measure", "f"}, w);
    auto c = body_from_json(io::req(j, "body", w), w + ".body");
    auto phi = concave_from_json(io::req(j, "phi", w), w + ".phi");
    auto mu = j.contains("measure") ? measure_from_json(j["measure"], w + ".measure") : WeightedMeasure::lebesgue(c.dim());
    Field f = field_from_json(io::req(j, "f", w), w + ".f");
    r = poincare_margin(mu, c, phi, io::get_num(j, "beta", w), f, o.quad);
  } else if (name == "torsion_bm") {
    io::check_keys(j, {"k", "l", "lambda", "measure", "sqrt_u"}, w);
    auto k = body_from_json(io::req(j, "k", w), w + ".k");
    auto l = body_from_json(io::req(j, "l", w), w + ".l");
    auto mu = j.contains("measure") ? measure_from_json(j["measure"], w + ".measure") : WeightedMeasure::lebesgue(k.dim());
    bool sq = j.contains("sqrt_u") && j["sqrt_u"].get<bool>();
    r = torsion_bm_check(k, l, io::get_num(j, "lambda", w, 0.5), mu, sq);
  } else if (name == "lift") {
    io::check_keys(j, {"body", "phi", "beta", "measure"}, w);
    auto k = body_from_json(io::req(j, "body", w), w + ".body");
    auto phi = concave_from_json(io::req(j, "phi", w), w + ".phi");
    auto mu = j.contains("measure") ? measure_from_json(j["measure"], w + ".measure") : WeightedMeasure::lebesgue(k.dim());
    r = lift_check(k, phi, io::get_int(j, "beta", w), mu, o.quad);
  } else if (name == "hereditary" || name == "spectral") {
    io::check_keys(j, {"measure", "nu", "u"}, w);
    auto mu = measure_from_json(io::req(j, "measure", w), w + ".measure");
    auto nu = even_density_from_json(j.contains("nu") ? j["nu"] : json::object(), mu.dim(), w + ".nu");
    Field u = field_from_json(io::req(j, "u", w), w + ".u");
    if (name == "hereditary") {
      r = hereditary_margin(mu, nu, u, o.quad);
      r.theorem = detail::admissible_weight(mu);
    } else {
      r = spectral_margin(mu, nu, u, o.quad);
      r.theorem = detail::admissible_weight(mu);
    }
  } else if (name == "concavity") {
    io::check_keys(j, {"problem", "grid"}, w);
    auto p = problem_from_json(io::req(j, "problem", w), w + ".problem");
    auto grid = j.contains("grid") ? grid_from_json(j["grid"], w + ".grid")
                                   : uniform_grid(p.family.t_lo(), p.family.t_hi(), 21);
    r = detail::from_profile("concavity", concavity_report(p, grid, o.jobs), true, json());
    r.theorem = detail::admissible_weight(p.mu) && p.phi.is_concave();
  } else if (name == "b_profile") {
    io::check_keys(j, {"body", "measure", "grid"}, w);
    auto k = body_from_json(io::req(j, "body", w), w + ".body");
    auto mu = measure_from_json(io::req(j, "measure", w), w + ".measure");
    auto grid = j.contains("grid") ? grid_from_json(j["grid"], w + ".grid") : uniform_grid(-1.0, 1.0, 9);
    r = detail::from_profile("b_profile", b_profile_check(k, mu, grid, o.quad, o.jobs), true, json());
    r.theorem = detail::admissible_weight(mu);
  } else if (name == "log_marginal") {
    io::check_keys(j, {"potential", "measure", "kappa", "grid"}, w);
    auto v = joint_potential_from_json(io::req(j, "potential", w), w + ".potential");
    auto mu = j.contains("measure") ? measure_from_json(j["measure"], w + ".measure") : WeightedMeasure::lebesgue(v.dim());
    AlphaOptions ao;
    ao.kappa = io::get_num(j, "kappa", w, 1.0);
    ao.quad = o.quad;
    ao.jobs = o.jobs;
    auto grid = j.contains("grid") ? grid_from_json(j["grid"], w + ".grid") : uniform_grid(-1.0, 1.0, 9);
    auto p = log_marginal_alpha(v, mu, grid, ao);
    r = detail::from_profile("log_marginal", p, true, json());
    // the conclusion is a theorem only when the kappa condition holds on the sampled cloud
    r.theorem = detail::admissible_weight(mu) && p.details.at("kappa_condition_margin") >= -1e-12;
  } else if (name == "negative_exponent") {
    r = detail::negative_exponent_check(j, o);
  } else {
    fail(ErrorCode::BadConfig, "unknown check '" + name + "'");
  }
  r.witness = j;
  return r;
}

// A theorem-status check whose margin falls below -tolerance.
inline bool escalates(const CheckReport& r) {
  if (!r.theorem) return false;
  if (r.name == "lift") return r.verdict == Verdict::Violated;
  return r.margin < -r.tolerance;
}

}  // namespace bmlab
