#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"
#include "integrate.hpp"
#include "measures.hpp"
#include "parallel.hpp"
#include "report.hpp"

namespace bmlab {

struct MarginalProblem {
  ConvexDomainFamily family;
  JointFunction phi;
  WeightedMeasure mu;
  double beta = 1.0;
  std::optional<double> gamma;  // default 1/(beta + n)
  QuadratureSpec quad;

  int dim() const { return family.dim(); }
  double exponent() const { return gamma ? *gamma : 1.0 / (beta + dim()); }

  void validate() const {
    if (!(beta > 0)) fail(ErrorCode::BadConfig, "beta must be positive");
    if (phi.dim() != dim() || mu.dim() != dim()) fail(ErrorCode::GridMismatch, "dimension mismatch in problem");
    double g = exponent();
    if (!(g != 0.0) || !std::isfinite(g)) fail(ErrorCode::BadConfig, "gamma must be finite and nonzero");
  }
};

// F(t) = int_{Omega_t} Phi(t,.)_+^beta dmu.
inline IntegralEstimate marginal_mass(const MarginalProblem& p, double t) {
  SymmetricBody k = p.family.section(t);
  if (k.is_empty()) return {};
  PowerClip clip = power_clip(p.phi, t, p.beta);
  IntegrateOptions opt;
  opt.clip = &clip;
  opt.rotation_invariant = p.phi.is_radial() && p.family.radius(t).has_value();
  return integrate_body(k, [](const Vec&) { return 1.0; }, p.mu, p.quad, opt);
}

inline double phi_eval(const MarginalProblem& p, double t) {
  p.validate();
  double m = marginal_mass(p, t).value;
  return m > 0.0 ? std::pow(m, p.exponent()) : 0.0;
}

struct ProfileReport {
  std::string kind = "concave";  // or "log-concave"
  std::vector<double> t, value, d2, d2_half;
  std::vector<bool> in_stencil;
  double h = 0.0;
  double min_d2 = inf, argmin = 0.0, max_d2 = -inf, argmax = 0.0;
  double tolerance = 0.0;
  double support_lo = -inf, support_hi = inf;
  Verdict verdict = Verdict::Inconclusive;
  std::map<std::string, double> details;
};

inline json to_json(const ProfileReport& r) {
  auto arr = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
  };
  json s = json::array();
  for (bool b : r.in_stencil) s.push_back(b);
  json d = json::object();
  for (const auto& [k, v] : r.details) d[k] = num(v);
  return json{{"kind", r.kind},
              {"verdict", to_string(r.verdict)},
              {"h", num(r.h)},
              {"tolerance", num(r.tolerance)},
              {"min_d2", num(r.min_d2)},
              {"argmin", num(r.argmin)},
              {"max_d2", num(r.max_d2)},
              {"argmax", num(r.argmax)},
              {"support_lo", num(r.support_lo)},
              {"support_hi", num(r.support_hi)},
              {"t", arr(r.t)},
              {"value", arr(r.value)},
              {"d2", arr(r.d2)},
              {"d2_half", arr(r.d2_half)},
              {"in_stencil", s},
              {"details", d}};
}

inline ProfileReport profile_report_from_json(const json& j) {
  ProfileReport r;
  auto arr = [](const json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(num(x));
    return v;
  };
  r.kind = j.at("kind").get<std::string>();
  r.verdict = verdict_from(j.at("verdict").get<std::string>());
  r.h = num(j.at("h"));
  r.tolerance = num(j.at("tolerance"));
  r.min_d2 = num(j.at("min_d2"));
  r.argmin = num(j.at("argmin"));
  r.max_d2 = num(j.at("max_d2"));
  r.argmax = num(j.at("argmax"));
  r.support_lo = num(j.at("support_lo"));
  r.support_hi = num(j.at("support_hi"));
  r.t = arr(j.at("t"));
  r.value = arr(j.at("value"));
  r.d2 = arr(j.at("d2"));
  r.d2_half = arr(j.at("d2_half"));
  for (const auto& b : j.at("in_stencil")) r.in_stencil.push_back(b.get<bool>());
  for (const auto& [k, v] : j.at("details").items()) r.details[k] = num(v);
  return r;
}

namespace detail {

inline void check_grid(const std::vector<double>& g) {
  if (g.size() < 3) fail(ErrorCode::TooFewPoints, "profile grid needs at least 3 points");
  double h = g[1] - g[0];
  for (std::size_t i = 1; i < g.size(); ++i) {
    double hi = g[i] - g[i - 1];
    if (!(hi > 0)) fail(ErrorCode::OutOfRange, "grid must be strictly increasing");
    if (std::abs(hi - h) > 1e-9 * std::max(1.0, std::abs(h))) fail(ErrorCode::OutOfRange, "grid must be uniform");
  }
}

// Second differences at h and h/2; eval(t) returns (value, error, defined).
struct Sample {
  double v = 0.0, err = 0.0;
  bool ok = false;
};

template <class Eval>
ProfileReport second_differences(const std::vector<double>& grid, Eval&& eval, int jobs, double abs_floor) {
  check_grid(grid);
  const std::size_t m = grid.size();
  const double h = grid[1] - grid[0];
  // evaluation points: grid and midpoints
  std::vector<double> pts;
  for (std::size_t i = 0; i < m; ++i) {
    pts.push_back(grid[i]);
    if (i + 1 < m) pts.push_back(0.5 * (grid[i] + grid[i + 1]));
  }
  std::vector<Sample> s(pts.size());
  parallel_for(pts.size(), jobs, [&](std::size_t i) { s[i] = eval(pts[i]); });
  ProfileReport r;
  r.h = h;
  r.t = grid;
  r.value.resize(m);
  r.d2.assign(m, std::numeric_limits<double>::quiet_NaN());
  r.d2_half.assign(m, std::numeric_limits<double>::quiet_NaN());
  r.in_stencil.assign(m, false);
  double err = 0.0, scale = 0.0;
  for (const auto& x : s)
    if (x.ok) err = std::max(err, x.err), scale = std::max(scale, std::abs(x.v));
  for (std::size_t i = 0; i < m; ++i) r.value[i] = s[2 * i].ok ? s[2 * i].v : 0.0;
  // propagated error of the h/2 stencil dominates: 4 err / (h/2)^2
  r.tolerance = 10.0 * 16.0 * err / (h * h) + abs_floor * (1.0 + scale) / (h * h);
  int count = 0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const Sample &a = s[2 * i - 2], &am = s[2 * i - 1], &b = s[2 * i], &bp = s[2 * i + 1], &c = s[2 * i + 2];
    if (!(a.ok && am.ok && b.ok && bp.ok && c.ok)) continue;
    r.in_stencil[i] = true;
    ++count;
    r.d2[i] = (a.v - 2.0 * b.v + c.v) / (h * h);
    r.d2_half[i] = (am.v - 2.0 * b.v + bp.v) / (0.25 * h * h);
    if (r.d2[i] < r.min_d2) r.min_d2 = r.d2[i], r.argmin = grid[i];
    double worst = std::min(r.d2[i], r.d2_half[i]);  // both stencils must exceed tol
    if (worst > r.max_d2) r.max_d2 = worst, r.argmax = grid[i];
  }
  if (count == 0) fail(ErrorCode::TooFewPoints, "fewer than 3 consecutive points in the support");
  double single = -inf;
  for (std::size_t i = 0; i < m; ++i)
    if (r.in_stencil[i]) single = std::max({single, r.d2[i], r.d2_half[i]});
  if (r.max_d2 > r.tolerance) r.verdict = Verdict::Violated;
  else if (single > r.tolerance) r.verdict = Verdict::Inconclusive;
  else r.verdict = Verdict::Holds;
  r.details["stencil_points"] = count;
  r.details["max_single_stencil_d2"] = single;
  r.details["max_point_error"] = err;
  return r;
}

}  // namespace detail

inline std::vector<double> uniform_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

inline ProfileReport concavity_report(const MarginalProblem& p, const std::vector<double>& grid, int jobs = 1) {
  p.validate();
  for (double t : grid)
    if (t < p.family.t_lo() - 1e-12 || t > p.family.t_hi() + 1e-12)
      fail(ErrorCode::OutOfRange, "grid leaves the family interval");
  auto nonempty = [&](double t) { return !p.family.section(t).is_empty() && marginal_mass(p, t).value > 0.0; };
  const double g = p.exponent();
  auto eval = [&](double t) {
    detail::Sample s;
    if (p.family.section(t).is_empty()) return s;
    auto m = marginal_mass(p, t);
    if (!(m.value > 0.0)) return s;
    s.ok = true;
    s.v = std::pow(m.value, g);
    s.err = std::abs(std::pow(m.value + m.error, g) - s.v);
    return s;
  };
  ProfileReport r = detail::second_differences(grid, eval, jobs, 1e-14);
  // support endpoints by bisection where emptiness changes between neighbours
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    bool a = nonempty(grid[i]), b = nonempty(grid[i + 1]);
    if (a == b) continue;
    double lo = grid[i], hi = grid[i + 1];
    while (hi - lo > 1e-10) {
      double mid = 0.5 * (lo + hi);
      (nonempty(mid) == a ? lo : hi) = mid;
    }
    (a ? r.support_hi : r.support_lo) = 0.5 * (lo + hi);
  }
  r.details["gamma"] = g;
  r.details["beta"] = p.beta;
  return r;
}

// Second derivative of phi at t by central differences with Richardson extrapolation.
struct FdSecond {
  double d2;        // extrapolated
  double d2_h;      // plain stencil at h
  double d2_half;   // at h/2
};
template <class F>
FdSecond fd_second(F&& f, double t, double h) {
  double f0 = f(t);
  double a = (f(t - h) - 2.0 * f0 + f(t + h)) / (h * h);
  double b = (f(t - 0.5 * h) - 2.0 * f0 + f(t + 0.5 * h)) / (0.25 * h * h);
  return {(4.0 * b - a) / 3.0, a, b};
}

// ---------------------------------------------------------------------------
// Log-marginals alpha(t) = int e^{-V(t,x)} dmu(x).

struct AlphaOptions {
  double kappa = 1.0;
  double box_t_lo = -1.0, box_t_hi = 1.0, box_x = 2.0;  // kappa-condition sample box
  int cloud = 4096;
  int jobs = 1;
  QuadratureSpec quad;
};

// Radius where e^{-V(t,.)} is below e^{-45} along every sampled direction.
inline double decay_radius(const JointPotential& v, double t, const WeightedMeasure& mu) {
  const int n = v.dim();
  const DirectionGrid& g = n == 3 ? DirectionGrid::make(3, 0, 16, 8) : DirectionGrid::make(n, 64);
  double R = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = 0.5;
    while (v.value(t, r * g.dir(i)) + mu.potential_value(r * g.dir(i)) - v.value(t, Vec::Zero(n)) < 45.0 && r < 1e6)
      r *= 1.2;
    R = std::max(R, r);
  }
  if (R >= 1e6) fail(ErrorCode::NotNonnegative, "e^{-V} does not decay: alpha is not finite");
  return R;
}

inline double kappa_condition_margin(const JointPotential& v, double kappa, const AlphaOptions& o, Vec* where = nullptr) {
  const int n = v.dim();
  double best = inf;
  for (int i = 0; i < o.cloud; ++i) {
    double t = o.box_t_lo + (o.box_t_hi - o.box_t_lo) * halton(i + 1, halton_primes[0]);
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = o.box_x * (2.0 * halton(i + 1, halton_primes[d + 1]) - 1.0);
    Mat h = v.hessian(t, x);
    Vec g = v.gradient(t, x).tail(n);
    Mat m = Mat::Zero(n + 1, n + 1);
    m(0, 0) = g.dot(x);
    m.block(1, 0, n, 1) = g;
    m.block(0, 1, 1, n) = g.transpose();
    Mat a = h - kappa * m;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    double ev = es.eigenvalues()(0);
    if (ev < best) {
      best = ev;
      if (where) {
        where->resize(n + 1);
        (*where)(0) = t;
        where->tail(n) = x;
      }
    }
  }
  return best;
}

inline ProfileReport log_marginal_alpha(const JointPotential& v, const WeightedMeasure& mu,
                                        const std::vector<double>& grid, const AlphaOptions& o = {}) {
  const int n = v.dim();
  if (mu.dim() != n) fail(ErrorCode::GridMismatch, "dimension mismatch");
  // evenness in x, sampled
  for (int i = 0; i < 64; ++i) {
    double t = grid.front() + (grid.back() - grid.front()) * halton(i + 1, 2);
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = 2.0 * (2.0 * halton(i + 1, halton_primes[d + 1]) - 1.0);
    double a = v.value(t, x), b = v.value(t, Vec(-x));
    if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a))) fail(ErrorCode::NotEven, "V(t,.) is not even");
  }
  bool radial_v = false;
  if (auto* c = std::get_if<JointPotential::Coupled>(&v.rule())) {
    double s = c->q(0, 0);
    radial_v = c->pairs.empty() && (c->q - s * Mat::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0;
  }
  auto eval = [&](double t) {
    detail::Sample s;
    double R = decay_radius(v, t, mu);
    double v0 = v.value(t, Vec::Zero(n));  // factor out e^{-V(t,0)} for range
    auto est = integrate_space([&](const Vec& x) { return std::exp(-(v.value(t, x) - v0)); }, mu, o.quad, R,
                               radial_v && mu.is_radial());
    if (!(est.value > 0.0)) return s;
    s.ok = true;
    s.v = std::log(est.value) - v0;
    s.err = est.error / est.value;
    return s;
  };
  ProfileReport r = detail::second_differences(grid, eval, o.jobs, 1e-14);
  r.kind = "log-concave";
  Vec at;
  r.details["kappa"] = o.kappa;
  r.details["kappa_condition_margin"] = kappa_condition_margin(v, o.kappa, o, &at);
  r.details["kappa_condition_t"] = at(0);
  return r;
}

// t -> log mu(e^t K).
inline ProfileReport b_profile_check(const SymmetricBody& k, const WeightedMeasure& mu, const std::vector<double>& grid,
                                     const QuadratureSpec& quad = {}, int jobs = 1) {
  auto eval = [&](double t) {
    detail::Sample s;
    auto m = measure_body(k.scaled(std::exp(t)), mu, quad);
    if (!(m.value > 0.0)) return s;
    s.ok = true;
    s.v = std::log(m.value);
    s.err = m.error / m.value;
    return s;
  };
  ProfileReport r = detail::second_differences(grid, eval, jobs, 1e-14);
  r.kind = "log-concave";
  return r;
}

}  // namespace bmlab
