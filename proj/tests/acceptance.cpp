// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <bmlab/cli.hpp>

using namespace bmlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string f(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

SearchReport sweep(const std::string& target, int n, std::size_t count, std::uint64_t seed,
                   const std::string& measure = "") {
  InstanceSpec s;
  s.target = target;
  s.n = n;
  s.count = count;
  s.seed = seed;
  s.measure = measure;
  return search_min_margin(s);
}

// min over entries of margin; errors and verdicts tallied separately
struct Tally {
  std::size_t total = 0, errors = 0, violated = 0;
  double min_margin = inf;
  void add(const SearchReport& r) {
    total += r.total;
    errors += r.errors;
    for (const auto& e : r.entries) {
      if (!e.error.empty()) continue;
      if (e.verdict == "violated") ++violated;
      min_margin = std::min(min_margin, e.margin);
    }
  }
};

// ---------------------------------------------------------------------------

Outcome disc_oracle() {
  auto t0 = Clock::now();
  MarginalProblem p{ConvexDomainFamily::disc_sections(), JointFunction::radial_poly(1, {2, 0, -1, -1, 0, 0}),
                    WeightedMeasure::lebesgue(1), 1.0, std::nullopt, {}};
  auto sv = second_variation(p, 0.0);
  auto fd = fd_second([&](double t) { return phi_eval(p, t); }, 0.0, 1e-2);
  double secs = seconds_since(t0);
  // F = 2r(2 - t^2) - 2r^3/3 with r = sqrt(1 - t^2): F(0) = 10/3, F''(0) = -6, phi = sqrt(F)
  double oracle = -6.0 / (2.0 * std::sqrt(10.0 / 3.0));
  double gap_rhs = std::abs(sv.value + 9.0 / 5.0);
  double gap_oracle = std::abs(sv.phi_dd - oracle);
  double gap_fd = std::abs(sv.phi_dd - fd.d2);
  bool ok = gap_rhs <= 1e-8 && gap_oracle <= 1e-8 && gap_fd <= 1e-4 && secs < 1.0;
  return {ok, f("rhs %.10f phi'' %.10f (oracle %.10f, fd %.10f) in %.3f s", sv.value, sv.phi_dd, oracle, fd.d2, secs)};
}

Outcome formula_vs_fd() {
  auto t0 = Clock::now();
  const int cases = 64;
  int bad = 0;
  double worst = 0.0;
  for (int i = 0; i < cases; ++i) {
    Stream rng(20240601, i);
    int n = i % 2 == 0 ? 1 : 2;
    WeightedMeasure mu = WeightedMeasure::lebesgue(n);
    switch ((i / 2) % 4) {
      case 1: mu = WeightedMeasure::gaussian(n); break;
      case 2: mu = WeightedMeasure(n, RadialWeight::power(4)); break;
      case 3: mu = WeightedMeasure(n, RadialWeight::heavy_tail(2, 4)); break;
      default: break;
    }
    RadiusProfile prof;
    if (rng.uniform() < 0.5) {
      prof = {RadiusProfile::Quadric, rng.uniform(0.8, 1.4), rng.uniform(-0.4, 0.4), rng.uniform(0.2, 0.8)};
    } else {
      prof = {RadiusProfile::Affine, rng.uniform(0.9, 1.3), rng.uniform(-0.5, 0.5), 0.0};
    }
    RadialPoly ph{rng.uniform(3.0, 4.0),   rng.uniform(-0.4, 0.4),  -rng.uniform(0.2, 1.0),
                  -rng.uniform(0.1, 0.6), -rng.uniform(0.0, 0.2), rng.uniform(-0.3, 0.3)};
    double beta = rng.uniform(0.5, 3.0);
    double t = rng.uniform(-0.3, 0.3);
    MarginalProblem p{ConvexDomainFamily::profile(n, -0.5, 0.5, prof), JointFunction::radial_poly(n, ph), mu, beta,
                      std::nullopt, {}};
    auto sv = second_variation(p, t);
    auto fd = fd_second([&](double s) { return phi_eval(p, s); }, t, 1e-2);
    double gap = std::abs(p.exponent() * sv.phi * sv.value - fd.d2) / (1 + std::abs(fd.d2));
    worst = std::max(worst, gap);
    if (!(gap <= 1e-4)) ++bad;
  }
  double secs = seconds_since(t0);
  return {bad == 0 && secs < 300, f("%d instances, %d off, worst relative gap %.2e, %.1f s", cases, bad, worst, secs)};
}

Outcome concavity_suite() {
  auto t0 = Clock::now();
  Tally t;
  t.add(sweep("concavity", 1, 50, 1101, "admissible"));
  t.add(sweep("concavity", 2, 50, 1102, "admissible"));
  double secs = seconds_since(t0);
  return {t.violated == 0 && t.errors == 0 && t.total >= 100 && secs < 600,
          f("%zu instances, %zu violated, %zu errors, min margin %.3e, %.1f s", t.total, t.violated, t.errors,
            t.min_margin, secs)};
}

Outcome bochner_battery() {
  double worst = 0.0;
  int count = 0;
  for (int i = 0; i < 24; ++i) {
    Stream rng(77, i);
    int n = i % 2 == 0 ? 1 : 2;
    std::vector<Polynomial::Term> terms;
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 4; ++b) {
        if (n == 1 && b > 0) continue;
        if (a + b == 0) continue;
        terms.push_back({rng.uniform(-1.0, 1.0), {a, b, 0}});
      }
    Polynomial u(n, terms);
    for (const auto& v : {Polynomial::constant(n, 0.0).field(), Polynomial::half_norm2(n).field()}) {
      auto b = bochner_residual(v, n, rng.uniform(0.5, 1.5), u.field());
      worst = std::max(worst, std::abs(b.residual) / b.scale);
      ++count;
    }
  }
  return {worst <= 1e-8, f("%d cases, max |residual|/scale %.2e", count, worst)};
}

Outcome brascamp_lieb() {
  auto g1 = Polynomial::half_norm2(1).field();
  double sat = 0.0;
  for (double c : {1.0, -0.5, 3.0}) {
    auto r = brascamp_lieb_margin(g1, 1, Polynomial::linear(make_vec({c})).field());
    sat = std::max(sat, std::abs(r.margin));
  }
  Tally t;
  t.add(sweep("brascamp_lieb", 1, 50, 501));
  t.add(sweep("brascamp_lieb", 2, 50, 502));
  return {sat <= 1e-8 && t.min_margin >= -1e-8 && t.errors == 0,
          f("linear saturation %.1e; %zu random, min margin %.3e, %zu errors", sat, t.total, t.min_margin, t.errors)};
}

Outcome b_local() {
  double flat = 0.0, sides = 0.0;
  for (int n = 1; n <= 3; ++n) {
    auto r = b_local_margin(EvenConvexPotential::zero(n), Vec::Ones(n));
    flat = std::max(flat, std::abs(r.margin));
    sides = std::max({sides, std::abs(r.details.at("second_moment_term") - 2 * n),
                      std::abs(r.details.at("variance") - 2 * n)});
  }
  Tally t;
  t.add(sweep("b_local", 1, 34, 601));
  t.add(sweep("b_local", 2, 33, 602));
  t.add(sweep("b_local", 3, 33, 603));
  return {flat <= 1e-8 && sides <= 1e-8 && t.min_margin >= -1e-8 && t.errors == 0,
          f("V=0 margin %.1e (sides off by %.1e); %zu random, min margin %.3e", flat, sides, t.total, t.min_margin)};
}

Outcome hereditary() {
  Tally t;
  std::size_t degenerate = 0;
  for (int n : {1, 2}) {
    InstanceSpec s;
    s.target = "hereditary";
    s.n = n;
    s.count = 50;
    s.seed = 700 + n;
    s.measure = "admissible";
    for (std::size_t i = 0; i < s.count; ++i)
      if (random_instance(s, i)["instance"]["nu"].empty()) ++degenerate;
    t.add(search_min_margin(s));
  }
  // nu = mu on the standard gaussian, u = x^2/2: margin 2
  auto h = hereditary_margin(WeightedMeasure::gaussian(1), {std::nullopt, EvenConvexPotential::zero(1)},
                             Polynomial::half_norm2(1).field());
  bool ok = t.min_margin >= -1e-8 && t.errors == 0 && degenerate > 0 && std::abs(h.margin - 2.0) <= 1e-8;
  return {ok, f("%zu instances (%zu with nu = mu), min margin %.3e, %zu errors", t.total, degenerate, t.min_margin,
                t.errors)};
}

Outcome torsion() {
  double err = 0.0;
  for (double a : {0.5, 1.0, 1.7}) {
    auto t = torsion_solve(SymmetricBody::interval(a), WeightedMeasure::lebesgue(1));
    err = std::max(err, std::abs(t.tau - 2 * a * a * a / 3));
  }
  for (double r : {0.6, 1.0, 1.4}) {
    auto t = torsion_solve(SymmetricBody::ball(2, r), WeightedMeasure::lebesgue(2));
    err = std::max(err, std::abs(t.tau - pi * std::pow(r, 4) / 8));
  }
  double energy = 0.0;
  for (const auto& [k, mu] : std::vector<std::pair<SymmetricBody, WeightedMeasure>>{
           {SymmetricBody::interval(1.2), WeightedMeasure::gaussian(1)},
           {SymmetricBody::interval(0.8), WeightedMeasure(1, RadialWeight::power(4))},
           {SymmetricBody::interval(1.5), WeightedMeasure(1, RadialWeight::heavy_tail(2, 4))},
           {SymmetricBody::ball(2, 1.1), WeightedMeasure::gaussian(2)},
           {SymmetricBody::ball(2, 0.9), WeightedMeasure(2, RadialWeight::power(4))},
           {SymmetricBody::ball(3, 1.0), WeightedMeasure::gaussian(3)}}) {
    auto t = torsion_solve(k, mu);
    energy = std::max(energy, std::abs(t.energy - t.tau));
  }
  Tally t;
  t.add(sweep("torsion_bm", 1, 25, 801));
  t.add(sweep("torsion_bm", 2, 25, 802));
  double homo = 0.0;
  homo = std::max(homo, std::abs(torsion_bm_check(SymmetricBody::interval(1), SymmetricBody::interval(2.5), 0.4,
                                                  WeightedMeasure::lebesgue(1)).margin));
  homo = std::max(homo, std::abs(torsion_bm_check(SymmetricBody::ball(2, 0.5), SymmetricBody::ball(2, 1.5), 0.3,
                                                  WeightedMeasure::lebesgue(2)).margin));
  bool ok = err <= 1e-9 && energy <= 1e-9 && t.min_margin >= -1e-8 && t.errors == 0 && homo <= 1e-9;
  return {ok, f("oracle err %.1e, |energy - tau| %.1e, %zu Lebesgue instances min margin %.3e, homothets %.1e", err,
                energy, t.total, t.min_margin, homo)};
}

Outcome measures() {
  QuadratureSpec polar;
  auto g1 = measure_body(SymmetricBody::interval(1), WeightedMeasure::gaussian(1), polar);
  auto g2 = measure_body(SymmetricBody::ball(2, 1), WeightedMeasure::gaussian(2), polar);
  double e1 = std::abs(g1.value - std::erf(1 / std::sqrt(2.0)));
  double e2 = std::abs(g2.value - (1 - std::exp(-0.5)));
  QuadratureSpec mc;
  mc.mode = QuadMode::MonteCarlo;
  mc.seed = 42;
  int cases = 0, disagree = 0;
  double worst = 0.0;
  std::vector<SymmetricBody> bodies = {SymmetricBody::interval(1.3), SymmetricBody::box({1.0, 0.5}),
                                       SymmetricBody::ellipsoid({1.2, 0.7}),
                                       SymmetricBody::polygon({make_vec({1.0, 0.2}), make_vec({0.3, 0.9})}),
                                       SymmetricBody::ball(3, 0.9), SymmetricBody::box({0.8, 0.6, 1.1})};
  for (const auto& k : bodies) {
    int n = k.dim();
    for (const auto& mu : {WeightedMeasure::lebesgue(n), WeightedMeasure::gaussian(n),
                           WeightedMeasure(n, RadialWeight::power(4)), WeightedMeasure(n, RadialWeight::heavy_tail(2, 4))}) {
      auto a = measure_body(k, mu, polar);
      auto b = measure_body(k, mu, mc);
      double gap = std::abs(a.value - b.value) / (a.error + b.error);
      worst = std::max(worst, gap);
      if (!(gap <= 4.0)) ++disagree;
      ++cases;
    }
  }
  return {e1 <= 1e-8 && e2 <= 1e-8 && disagree == 0,
          f("gamma1 %.10f (err %.1e), gamma2 %.10f (err %.1e); polar vs MC %d/%d within 4 bars (worst %.2f)", g1.value,
            e1, g2.value, e2, cases - disagree, cases, worst)};
}

Outcome lift() {
  QuadratureSpec q;
  q.mc_samples = 2'000'000;
  auto r = lift_check(SymmetricBody::interval(1), ConcaveFunction::isotropic(1, 1, 1), 2, WeightedMeasure::lebesgue(1), q);
  double quad = r.details.at("quadrature"), est = r.details.at("monte_carlo"), se = r.details.at("standard_error");
  bool ok = std::abs(quad - 16.0 / 15.0) <= 1e-12 && std::abs(est - 16.0 / 15.0) <= 3 * se;
  return {ok, f("quadrature %.12f, MC %.6f +- %.1e (%.2f sigma)", quad, est, se, std::abs(est - 16.0 / 15.0) / se)};
}

Outcome bbl_counterexample() {
  BblInstance c;
  c.f = BblField::indicator(make_vec({0.0}), 1);
  c.g = BblField::indicator(make_vec({20.0}), 1);
  c.h = BblField::indicator(make_vec({10.0}), 1);
  c.kappa = 1;
  c.lambda = 0.5;
  c.mu = WeightedMeasure::gaussian(1);
  auto r = bbl_check(c);
  return {r.margin < 0 && r.verdict == Verdict::Violated,
          f("margin %.6f, verdict %s", r.margin, to_string(r.verdict))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  fs::path dir = fs::temp_directory_path() / "bmlab_acceptance_search";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path cfg = dir / "search.json";
  std::ofstream(cfg) << R"({"command": "search",
    "search": {"target": "dim_bm", "n": 2, "count": 24, "seed": 2024, "measure": "admissible",
               "quadrature": {"mode": "mc", "mc_samples": 20000}}})";
  std::vector<std::string> outs;
  for (int jobs : {1, 4, 1, 3}) {
    cli::Options o;
    o.command = "search";
    o.config = cfg.string();
    o.out = (dir / ("jobs" + std::to_string(jobs) + "_" + std::to_string(outs.size()))).string();
    o.jobs = jobs;
    std::ostringstream log, err;
    int code = cli::execute(o, log, err);
    if (code == 2) return {false, "search failed: " + err.str()};
    outs.push_back(slurp(fs::path(o.out) / "search.json"));
  }
  bool same = !outs[0].empty();
  for (const auto& s : outs) same = same && s == outs[0];
  return {same, f("4 runs (jobs 1, 4, 1, 3): %s, %zu bytes", same ? "identical" : "differ", outs[0].size())};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 second-variation disc oracle", disc_oracle},
      {"2 formula vs finite differences", formula_vs_fd},
      {"3 marginal concavity suite", concavity_suite},
      {"4 Bochner-Reilly battery", bochner_battery},
      {"5 Brascamp-Lieb", brascamp_lieb},
      {"6 gaussian B local form", b_local},
      {"7 hereditary convexity", hereditary},
      {"8 torsion", torsion},
      {"9 measure oracles", measures},
      {"10 lift", lift},
      {"11 BBL counterexample", bbl_counterexample},
      {"12 search determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
