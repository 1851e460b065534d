#pragma once

// Command-line driver: bmlab <command> --config <path> [--out <dir>] [--seed <u64>]
// [--quad polar|mc] [--jobs N]. Exit codes: 0 ok, 1 theorem-status violation,
// 2 config or I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "checks.hpp"
#include "search.hpp"

namespace bmlab::cli {

enum Exit { Ok = 0, Violated = 1, ConfigError = 2 };

struct Options {
  std::string command;
  std::string check_name;
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> quad;
  int jobs = 1;
};

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Second-variation and torsion reports

struct SecondVariationReport {
  double t0 = 0.0;
  SecondVariation sv;
  double fd_step = 0.0, fd_d2 = 0.0, fd_gap = 0.0;
  json problem;
};

inline json to_json(const SecondVariationReport& r) {
  json terms = json::object();
  for (const auto& [k, v] : r.sv.terms) terms[k] = num(v);
  return {{"t0", num(r.t0)},
          {"rhs", num(r.sv.value)},
          {"literal_rhs", num(r.sv.literal_value)},
          {"phi", num(r.sv.phi)},
          {"phi_dd", num(r.sv.phi_dd)},
          {"A", num(r.sv.A)},
          {"B", num(r.sv.B)},
          {"C", num(r.sv.C)},
          {"terms", terms},
          {"fd_step", num(r.fd_step)},
          {"fd_phi_dd", num(r.fd_d2)},
          {"fd_gap", num(r.fd_gap)},
          {"problem", r.problem}};
}

inline SecondVariationReport second_variation_report_from_json(const json& j) {
  SecondVariationReport r;
  r.t0 = num(j.at("t0"));
  r.sv.value = num(j.at("rhs"));
  r.sv.literal_value = num(j.at("literal_rhs"));
  r.sv.phi = num(j.at("phi"));
  r.sv.phi_dd = num(j.at("phi_dd"));
  r.sv.A = num(j.at("A"));
  r.sv.B = num(j.at("B"));
  r.sv.C = num(j.at("C"));
  for (const auto& [k, v] : j.at("terms").items()) r.sv.terms[k] = num(v);
  r.fd_step = num(j.at("fd_step"));
  r.fd_d2 = num(j.at("fd_phi_dd"));
  r.fd_gap = num(j.at("fd_gap"));
  r.problem = j.at("problem");
  return r;
}

inline json torsion_json(const TorsionSolution& s, const SymmetricBody& k, const WeightedMeasure& mu) {
  json r = json::array(), u = json::array(), du = json::array();
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    r.push_back(num(s.r[i]));
    u.push_back(num(s.u[i]));
    du.push_back(num(s.du[i]));
  }
  return {{"body", to_json(k)}, {"measure", to_json(mu)}, {"tau", num(s.tau)}, {"energy", num(s.energy)},
          {"gap", num(std::abs(s.tau - s.energy))}, {"r", r}, {"u", u}, {"du", du}};
}

// ---------------------------------------------------------------------------
// Output

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::Io, "cannot write " + p.string());
  f << text;
  if (!f) fail(ErrorCode::Io, "cannot write " + p.string());
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string profile_csv(const ProfileReport& r) {
  std::string s = "t,phi,d2,d2_half,in_stencil\n";
  for (std::size_t i = 0; i < r.t.size(); ++i)
    s += fmt17(r.t[i]) + "," + fmt17(r.value[i]) + "," + fmt17(r.d2[i]) + "," + fmt17(r.d2_half[i]) + "," +
         (r.in_stencil[i] ? "1" : "0") + "\n";
  return s;
}

inline std::string check_csv(const CheckReport& r) {
  return "name,margin,tolerance,verdict,theorem\n" + r.name + "," + fmt17(r.margin) + "," + fmt17(r.tolerance) +
         "," + to_string(r.verdict) + "," + (r.theorem ? "1" : "0") + "\n";
}

inline std::string search_csv(const SearchReport& r) {
  std::string s = "instance,margin,tolerance,verdict,theorem\n";
  for (const auto& e : r.entries)
    s += std::to_string(e.index) + "," + fmt17(e.margin) + "," + fmt17(e.tolerance) + "," + e.verdict + "," +
         (e.theorem ? "1" : "0") + "\n";
  return s;
}

inline std::string torsion_csv(const TorsionSolution& t) {
  std::string s = "r,u,du\n";
  for (std::size_t i = 0; i < t.r.size(); ++i) s += fmt17(t.r[i]) + "," + fmt17(t.u[i]) + "," + fmt17(t.du[i]) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  Options opt;
  json config;
  QuadratureSpec quad;
  std::filesystem::path out;
  std::ostream* log = &std::cout;
};

inline QuadratureSpec read_quad(const json& cfg, const Options& o) {
  QuadratureSpec q = cfg.contains("quadrature") ? quadrature_from_json(cfg["quadrature"]) : QuadratureSpec{};
  if (o.quad) {
    if (*o.quad == "polar") q.mode = QuadMode::Polar;
    else if (*o.quad == "mc") q.mode = QuadMode::MonteCarlo;
    else fail(ErrorCode::BadConfig, "--quad: expected 'polar' or 'mc'");
  }
  if (o.seed) q.seed = *o.seed;
  return q;
}

inline int cmd_marginal_profile(Context& c) {
  io::check_keys(c.config, {"command", "problem", "grid", "quadrature"}, "config");
  auto p = problem_from_json(io::req(c.config, "problem", "config"), "config.problem");
  p.quad = c.quad;
  auto grid = c.config.contains("grid") ? grid_from_json(c.config["grid"], "config.grid")
                                        : uniform_grid(p.family.t_lo(), p.family.t_hi(), 21);
  auto r = concavity_report(p, grid, c.opt.jobs);
  bool theorem = detail::admissible_weight(p.mu) && p.phi.is_concave();
  json j = to_json(r);
  j["theorem"] = theorem;
  j["problem"] = to_json(p);
  write_file(c.out / "marginal_profile.json", dump(j));
  write_file(c.out / "marginal_profile.csv", profile_csv(r));
  *c.log << "verdict " << to_string(r.verdict) << " max_d2 " << fmt17(r.max_d2) << " tolerance "
         << fmt17(r.tolerance) << "\n";
  return theorem && r.verdict == Verdict::Violated ? Violated : Ok;
}

inline int cmd_second_variation(Context& c) {
  io::check_keys(c.config, {"command", "problem", "t0", "fd_step", "quadrature"}, "config");
  auto p = problem_from_json(io::req(c.config, "problem", "config"), "config.problem");
  p.quad = c.quad;
  SecondVariationReport r;
  r.t0 = io::get_num(c.config, "t0", "config", 0.0);
  r.fd_step = io::get_num(c.config, "fd_step", "config", 1e-2);
  if (!(r.fd_step > 0)) fail(ErrorCode::BadConfig, "config.fd_step: must be positive");
  r.sv = second_variation(p, r.t0);
  r.fd_d2 = fd_second([&](double t) { return phi_eval(p, t); }, r.t0, r.fd_step).d2;
  r.fd_gap = std::abs(r.sv.phi_dd - r.fd_d2);
  r.problem = to_json(p);
  write_file(c.out / "second_variation.json", dump(to_json(r)));
  std::string csv = "term,value\n";
  for (const auto& [k, v] : r.sv.terms) csv += k + "," + fmt17(v) + "\n";
  write_file(c.out / "second_variation.csv", csv);
  *c.log << "phi_dd " << fmt17(r.sv.phi_dd) << " fd " << fmt17(r.fd_d2) << " rhs " << fmt17(r.sv.value) << "\n";
  return Ok;
}

inline int cmd_check(Context& c) {
  io::check_keys(c.config, {"command", "check", "instance", "quadrature", "seed"}, "config");
  std::string name = c.opt.check_name;
  if (c.config.contains("check")) {
    std::string n = io::get_str(c.config, "check", "config");
    if (name.empty()) name = n;
    else if (n != name) fail(ErrorCode::BadConfig, "config.check: '" + n + "' differs from the command line");
  }
  if (name.empty()) fail(ErrorCode::BadConfig, "check: missing check name");
  CheckOptions o;
  o.quad = c.quad;
  o.jobs = c.opt.jobs;
  o.seed = c.opt.seed ? *c.opt.seed : (c.config.contains("seed") ? c.config["seed"].get<std::uint64_t>() : 0);
  auto r = run_check(name, io::req(c.config, "instance", "config"), o);
  write_file(c.out / ("check_" + name + ".json"), dump(to_json(r)));
  write_file(c.out / ("check_" + name + ".csv"), check_csv(r));
  *c.log << name << " margin " << fmt17(r.margin) << " tolerance " << fmt17(r.tolerance) << " verdict "
         << to_string(r.verdict) << (r.theorem ? "" : " (exploratory)") << "\n";
  return escalates(r) ? Violated : Ok;
}

inline int cmd_b_profile(Context& c) {
  io::check_keys(c.config, {"command", "body", "potential", "measure", "grid", "kappa", "quadrature"}, "config");
  auto grid =
      c.config.contains("grid") ? grid_from_json(c.config["grid"], "config.grid") : uniform_grid(-1.0, 1.0, 9);
  ProfileReport r;
  bool theorem = false;
  json what;
  if (c.config.contains("potential")) {
    auto v = joint_potential_from_json(c.config["potential"], "config.potential");
    auto mu = c.config.contains("measure") ? measure_from_json(c.config["measure"], "config.measure")
                                           : WeightedMeasure::lebesgue(v.dim());
    AlphaOptions ao;
    ao.kappa = io::get_num(c.config, "kappa", "config", 1.0);
    ao.quad = c.quad;
    ao.jobs = c.opt.jobs;
    r = log_marginal_alpha(v, mu, grid, ao);
    theorem = detail::admissible_weight(mu) && r.details.at("kappa_condition_margin") >= -1e-12;
    what = {{"potential", to_json(v)}, {"measure", to_json(mu)}};
  } else {
    auto k = body_from_json(io::req(c.config, "body", "config"), "config.body");
    auto mu = c.config.contains("measure") ? measure_from_json(c.config["measure"], "config.measure")
                                           : WeightedMeasure::gaussian(k.dim());
    r = b_profile_check(k, mu, grid, c.quad, c.opt.jobs);
    theorem = detail::admissible_weight(mu);
    what = {{"body", to_json(k)}, {"measure", to_json(mu)}};
  }
  json j = to_json(r);
  j["theorem"] = theorem;
  j["input"] = what;
  write_file(c.out / "b_profile.json", dump(j));
  write_file(c.out / "b_profile.csv", profile_csv(r));
  *c.log << "verdict " << to_string(r.verdict) << " max_d2 " << fmt17(r.max_d2) << "\n";
  return theorem && r.verdict == Verdict::Violated ? Violated : Ok;
}

inline int cmd_torsion(Context& c) {
  io::check_keys(c.config, {"command", "body", "measure", "l", "lambda", "sqrt_u"}, "config");
  auto k = body_from_json(io::req(c.config, "body", "config"), "config.body");
  auto mu = c.config.contains("measure") ? measure_from_json(c.config["measure"], "config.measure")
                                         : WeightedMeasure::lebesgue(k.dim());
  auto t = torsion_solve(k, mu);
  json j = torsion_json(t, k, mu);
  int code = Ok;
  if (c.config.contains("l")) {
    auto l = body_from_json(c.config["l"], "config.l");
    bool sq = c.config.contains("sqrt_u") && c.config["sqrt_u"].get<bool>();
    auto r = torsion_bm_check(k, l, io::get_num(c.config, "lambda", "config", 0.5), mu, sq);
    j["brunn_minkowski"] = to_json(r);
    if (escalates(r)) code = Violated;
  }
  write_file(c.out / "torsion.json", dump(j));
  write_file(c.out / "torsion.csv", torsion_csv(t));
  *c.log << "tau " << fmt17(t.tau) << " energy " << fmt17(t.energy) << "\n";
  return code;
}

inline int cmd_search(Context& c) {
  io::check_keys(c.config, {"command", "search"}, "config");
  json sj = io::req(c.config, "search", "config");
  auto s = instance_spec_from_json(sj, "config.search");
  if (c.opt.seed) s.seed = *c.opt.seed;
  if (c.opt.quad) s.quad.mode = c.quad.mode;
  auto r = search_min_margin(s, c.opt.jobs);
  write_file(c.out / "search.json", dump(to_json(r)));
  write_file(c.out / "search.csv", search_csv(r));
  *c.log << s.target << " min_margin " << fmt17(r.min_margin) << " at " << r.argmin_index << " escalations "
         << r.escalations << " errors " << r.errors << (r.exploratory ? " (exploratory)" : "") << "\n";
  return r.escalations > 0 ? Violated : Ok;
}

inline int jobs_from_env(int requested) {
  if (const char* env = std::getenv("BMLAB_JOBS")) {
    int j = std::atoi(env);
    if (j > 0) return j;
  }
  return std::max(1, requested);
}

inline int execute(const Options& o, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  Context c;
  c.opt = o;
  c.opt.jobs = jobs_from_env(o.jobs);
  c.log = &log;
  try {
    std::ifstream in(o.config);
    if (!in) fail(ErrorCode::Io, "cannot read config '" + o.config + "'");
    try {
      c.config = json::parse(in);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::BadConfig, o.config + ": " + e.what());
    }
    if (!c.config.is_object()) fail(ErrorCode::BadConfig, "config: expected an object");
    if (c.config.contains("command") && io::get_str(c.config, "command", "config") != o.command)
      fail(ErrorCode::BadConfig, "config.command: does not match '" + o.command + "'");
    c.quad = c.config.contains("search") ? QuadratureSpec{} : read_quad(c.config, o);
    c.out = o.out;
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory '" + o.out + "'");
    if (o.command == "marginal-profile") return cmd_marginal_profile(c);
    if (o.command == "second-variation") return cmd_second_variation(c);
    if (o.command == "check") return cmd_check(c);
    if (o.command == "b-profile") return cmd_b_profile(c);
    if (o.command == "torsion") return cmd_torsion(c);
    if (o.command == "search") return cmd_search(c);
    fail(ErrorCode::BadConfig, "unknown command '" + o.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ConfigError;
  } catch (const json::exception& e) {
    err << "error: BAD_CONFIG: " << e.what() << "\n";
    return ConfigError;
  }
}

inline int main(int argc, char** argv) {
  CLI::App app{"bmlab: concavity principles for weighted marginals"};
  app.require_subcommand(1);
  Options o;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> quad;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "JSON config")->required();
    s->add_option("--out", o.out, "output directory");
    s->add_option("--seed", seed, "seed (u64)");
    s->add_option("--quad", quad, "polar or mc")->check(CLI::IsMember({"polar", "mc"}));
    s->add_option("--jobs", o.jobs, "worker threads (BMLAB_JOBS overrides)")->check(CLI::PositiveNumber);
  };
  for (const char* name : {"marginal-profile", "second-variation", "b-profile", "torsion", "search"})
    common(app.add_subcommand(name));
  auto* chk = app.add_subcommand("check", "run a named check");
  chk->add_option("name", o.check_name, "check name")->required();
  common(chk);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? Ok : ConfigError;
  }
  o.command = app.get_subcommands().front()->get_name();
  o.seed = seed;
  o.quad = quad;
  return execute(o);
}

}  // namespace bmlab::cli
