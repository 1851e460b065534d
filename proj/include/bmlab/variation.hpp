#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"
#include "integrate.hpp"
#include "marginals.hpp"
#include "measures.hpp"
#include "report.hpp"

namespace bmlab {

// ---------------------------------------------------------------------------
// Boundary kinematics of ball / interval sections.

struct BoundaryKinematics {
  int n = 1;
  double r = 0.0;        // section radius at t0
  double psi = 0.0;      // r'(t0)
  double psi_dot = 0.0;  // r''(t0)
  double ii = 0.0;       // 1/r for n >= 2, absent (0) for n = 1
  double mean_curvature = 0.0;  // (n-1)/r - G'(r), filled once the density is known
};

inline BoundaryKinematics boundary_kinematics(const ConvexDomainFamily& fam, double t0) {
  auto rad = fam.radius(t0);
  if (!rad) fail(ErrorCode::MissingKinematics, "sections are not balls; no radial kinematics");
  if (!(rad->r > 0)) fail(ErrorCode::EmptyBody, "empty section at t0");
  BoundaryKinematics k;
  k.n = fam.dim();
  k.r = rad->r;
  k.psi = rad->dr;
  k.psi_dot = rad->d2r;
  k.ii = k.n >= 2 ? 1.0 / k.r : 0.0;
  k.mean_curvature = (k.n - 1) / k.r;
  return k;
}

// ---------------------------------------------------------------------------
// L_nu u = f with Neumann data, nu proportional to e^{-G}.

enum class NeumannGeometry { Interval, Radial };

struct NeumannProblem {
  NeumannGeometry geometry = NeumannGeometry::Interval;
  int n = 1;
  double r0 = 1.0;
  std::function<double(double)> G = [](double) { return 0.0; };
  std::function<double(double)> dG = [](double) { return 0.0; };
  std::function<double(double)> f = [](double) { return 0.0; };
  double psi_lo = 0.0;  // outward normal derivative at -r0 (interval only)
  double psi_hi = 0.0;  // at +r0, or on the sphere of radius r0
  int grid = 512;
  double tol = 1e-8;
  int order = 48;
};

struct NeumannSolution {
  NeumannGeometry geometry = NeumannGeometry::Interval;
  int n = 1;
  double r0 = 1.0;
  std::vector<double> x, u, du;
  double boundary_derivative_lo = 0.0, boundary_derivative_hi = 0.0;
  double compatibility_defect = 0.0;
  double residual = 0.0;
  std::function<double(double)> du_at, d2u_at;
};

inline NeumannSolution solve_neumann(const NeumannProblem& p) {
  if (!(p.r0 > 0)) fail(ErrorCode::EmptyBody, "domain radius must be positive");
  NeumannSolution s;
  s.geometry = p.geometry;
  s.n = p.geometry == NeumannGeometry::Interval ? 1 : p.n;
  s.r0 = p.r0;
  const double a = p.r0;
  const int n = s.n;
  const int order = p.order;
  auto G = p.G, dG = p.dG, f = p.f;

  if (p.geometry == NeumannGeometry::Interval) {
    double plo = p.psi_lo;
    // u'(x) = e^{G(x)-G(-a)} (-psi_lo) + int_{-a}^x f(s) e^{G(x)-G(s)} ds
    s.du_at = [=](double x) {
      double gx = G(x);
      double v = -plo * std::exp(gx - G(-a));
      if (x > -a) v += integrate_gl([&](double y) { return f(y) * std::exp(gx - G(y)); }, -a, x, order);
      return v;
    };
    s.d2u_at = [=, du = s.du_at](double x) { return f(x) + dG(x) * du(x); };
    double mass = integrate_gl([&](double y) { return std::exp(-G(y)); }, -a, a, order, 2);
    double lhs = integrate_gl([&](double y) { return f(y) * std::exp(-G(y)); }, -a, a, order, 2);
    double rhs = p.psi_hi * std::exp(-G(a)) + p.psi_lo * std::exp(-G(-a));
    s.compatibility_defect = (lhs - rhs) / mass;
  } else {
    // u'(r) = int_0^r (s/r)^{n-1} e^{G(r)-G(s)} f(s) ds
    s.du_at = [=](double r) {
      if (r <= 0.0) return 0.0;
      double gr = G(r);
      return integrate_gl([&](double y) { return std::pow(y / r, n - 1) * std::exp(gr - G(y)) * f(y); }, 0.0, r, order);
    };
    s.d2u_at = [=, du = s.du_at](double r) {
      if (r <= 0.0) return f(0.0) / n;
      double d = du(r);
      return f(r) - (n - 1) * d / r + dG(r) * d;
    };
    auto jac = [n](double y) { return n == 1 ? 1.0 : std::pow(y, n - 1); };
    double mass = integrate_gl([&](double y) { return jac(y) * std::exp(-G(y)); }, 0.0, a, order, 2);
    double lhs = integrate_gl([&](double y) { return jac(y) * std::exp(-G(y)) * f(y); }, 0.0, a, order, 2);
    double rhs = p.psi_hi * jac(a) * std::exp(-G(a));
    s.compatibility_defect = (lhs - rhs) / mass;
  }
  if (std::abs(s.compatibility_defect) > p.tol)
    fail(ErrorCode::IncompatibleData, "compatibility defect " + std::to_string(s.compatibility_defect));

  // tabulate, u(center) = 0
  const double lo = p.geometry == NeumannGeometry::Interval ? -a : 0.0;
  const int m = p.grid;
  s.x.resize(m + 1);
  s.du.resize(m + 1);
  s.u.assign(m + 1, 0.0);
  for (int i = 0; i <= m; ++i) {
    s.x[i] = lo + (a - lo) * i / m;
    s.du[i] = s.du_at(s.x[i]);
  }
  std::vector<double> cum(m + 1, 0.0);
  for (int i = 1; i <= m; ++i) cum[i] = cum[i - 1] + integrate_gl(s.du_at, s.x[i - 1], s.x[i], 8);
  double u0 = cum[0];
  if (p.geometry == NeumannGeometry::Interval) {
    double c = integrate_gl(s.du_at, -a, 0.0, order);  // u(0) - u(-a)
    u0 = c;
  }
  for (int i = 0; i <= m; ++i) s.u[i] = cum[i] - u0;
  s.boundary_derivative_hi = s.du.back();
  s.boundary_derivative_lo = p.geometry == NeumannGeometry::Interval ? -s.du.front() : 0.0;

  // independent residual: 4th-order differences of u'
  double d = 1e-3 * a, res = 0.0;
  for (int i = 0; i <= m; ++i) {
    double x = s.x[i];
    if (x - 2 * d < lo || x + 2 * d > a) continue;
    if (p.geometry == NeumannGeometry::Radial && x - 2 * d <= 0.0) continue;
    double d2 = (-s.du_at(x + 2 * d) + 8 * s.du_at(x + d) - 8 * s.du_at(x - d) + s.du_at(x - 2 * d)) / (12 * d);
    double lu = d2 - dG(x) * s.du[i];
    if (p.geometry == NeumannGeometry::Radial) lu += (n - 1) * s.du[i] / x;
    res = std::max(res, std::abs(lu - f(x)));
  }
  s.residual = res;
  return s;
}

// ---------------------------------------------------------------------------
// Second derivative of a marginal through the Neumann solve.

struct SecondVariation {
  double value = 0.0;  // (1/gamma) phi''/phi
  double literal_value = 0.0;  // same sum without the transport term for the explicit t-dependence of Phi on Sigma
  double phi = 0.0;
  double phi_dd = 0.0;
  double A = 0.0, B = 0.0, C = 0.0;
  std::map<std::string, double> terms;
};

namespace detail {

struct RadialSetup {
  int n;
  double r0, beta, gamma, t0, mass_unnorm, surface;
  std::function<double(double)> G, dG, q;  // q = unnormalized density in r (no Jacobian)
};

inline RadialSetup radial_setup(const MarginalProblem& p, double t0, const BoundaryKinematics& kin) {
  p.validate();
  const int n = p.dim();
  if (!(p.phi.is_radial() && p.mu.is_radial())) fail(ErrorCode::MissingKinematics, "needs radial data");
  const RadialWeight w = p.mu.weight();
  const JointFunction phi = p.phi;
  const double beta = p.beta, r0 = kin.r;
  for (int i = 0; i <= 64; ++i) {
    double r = r0 * i / 64.0;
    if (!(phi.radial_data(t0, r).v > 0.0)) fail(ErrorCode::NotPositive, "Phi is not positive on the closed section");
  }
  RadialSetup s;
  s.n = n;
  s.r0 = r0;
  s.beta = beta;
  s.gamma = p.exponent();
  s.t0 = t0;
  s.G = [=](double r) { return w.w(r) - beta * std::log(phi.radial_data(t0, r).v); };
  s.dG = [=](double r) {
    auto d = phi.radial_data(t0, r);
    return w.dw(r) - beta * d.r / d.v;
  };
  const double ln = p.mu.log_normalizer();
  s.q = [=](double r) { return std::exp(-w.w(r) - ln) * std::pow(phi.radial_data(t0, r).v, beta); };
  auto jac = [n](double r) { return n == 1 ? 1.0 : std::pow(r, n - 1); };
  s.mass_unnorm = sphere_area(n) * integrate_gl([&](double r) { return jac(r) * s.q(r); }, 0.0, r0, 64, 2);
  s.surface = sphere_area(n) * jac(r0) * s.q(r0) / s.mass_unnorm;  // nu_Sigma(Sigma)
  return s;
}

// int over nu of h(r) (radial integrand)
template <class H>
double nu_integral(const RadialSetup& s, H&& h, int order = 64, int panels = 2) {
  const int n = s.n;
  return sphere_area(n) *
         integrate_gl([&](double r) { return (n == 1 ? 1.0 : std::pow(r, n - 1)) * s.q(r) * h(r); }, 0.0, s.r0, order,
                      panels) /
         s.mass_unnorm;
}

}  // namespace detail

inline NeumannSolution marginal_neumann(const MarginalProblem& p, double t0, const BoundaryKinematics& kin) {
  auto s = detail::radial_setup(p, t0, kin);
  const JointFunction phi = p.phi;
  const double beta = p.beta;
  auto ratio = [phi, t0](double r) {
    auto d = phi.radial_data(t0, r);
    return d.t / d.v;
  };
  double B = detail::nu_integral(s, ratio);
  double C = kin.psi * s.surface;
  NeumannProblem np;
  np.geometry = NeumannGeometry::Radial;
  np.n = s.n;
  np.r0 = s.r0;
  np.G = s.G;
  np.dG = s.dG;
  np.f = [=](double r) { return ratio(r) - B - C / beta; };
  np.psi_hi = -kin.psi / beta;
  np.grid = 256;
  return solve_neumann(np);
}

inline SecondVariation second_variation_rhs(const MarginalProblem& p, double t0, const BoundaryKinematics& kin,
                                            const NeumannSolution& sol) {
  if (kin.r <= 0.0) fail(ErrorCode::MissingKinematics, "kinematics were not computed");
  auto s = detail::radial_setup(p, t0, kin);
  const int n = s.n;
  const double beta = p.beta, gamma = s.gamma;
  const RadialWeight w = p.mu.weight();
  const JointFunction& phi = p.phi;
  auto du = sol.du_at;
  SecondVariation out;
  out.B = detail::nu_integral(s, [&](double r) {
    auto d = phi.radial_data(t0, r);
    return d.t / d.v;
  });
  out.C = kin.psi * s.surface;
  const double B = out.B, C = out.C;
  // one pass over the nodes for all bulk integrals
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, A = 0.0;
  {
    const Rule& rule = gauss_legendre(64);
    const int panels = 2;
    double h = s.r0 / panels;
    for (int pnl = 0; pnl < panels; ++pnl) {
      for (std::size_t i = 0; i < rule.size(); ++i) {
        double r = pnl * h + 0.5 * h * (1.0 + rule.x[i]);
        double wt = 0.5 * h * rule.w[i] * sphere_area(n) * (n == 1 ? 1.0 : std::pow(r, n - 1)) * s.q(r) / s.mass_unnorm;
        auto d = phi.radial_data(t0, r);
        double u1 = du(r);
        double u2 = sol.d2u_at(r);
        double lmu = u2 + (n - 1) * u1 / r - w.dw(r) * u1;
        t1 += wt * (d.tt - 2.0 * beta * d.tr * u1 + beta * beta * d.rr * u1 * u1) / d.v;
        t2 += wt * (u2 * u2 + (n - 1) * sqr(u1 / r) + w.d2w(r) * u1 * u1);
        t3 += wt * lmu * lmu;
        A += wt * lmu;
      }
    }
  }
  out.A = A;
  auto dr0 = phi.radial_data(t0, s.r0);
  auto& T = out.terms;
  T["bulk_hessian"] = beta * t1;
  T["bochner_bulk"] = -beta * beta * t2;
  T["lmu_square"] = -beta * t3;
  T["B_square"] = -beta * (1.0 - beta * gamma) * B * B;
  T["C_square"] = -(1.0 / beta - gamma) * C * C;
  T["AB"] = -2.0 * beta * A * B;
  T["AC"] = -2.0 * A * C;
  T["BC"] = -2.0 * beta * (1.0 / beta - gamma) * B * C;
  T["boundary_dt_phi"] = -beta * (dr0.t / dr0.v) * kin.psi * s.surface;
  T["boundary_psi_dot"] = kin.psi_dot * s.surface;
  // Phi(t, F(t,y))^beta also moves through its explicit t argument on the boundary
  T["boundary_dt_phi_transport"] = beta * (dr0.t / dr0.v) * kin.psi * s.surface;
  T["boundary_second_form"] = 0.0;  // tangential gradients vanish for radial data
  double v = 0.0;
  for (const auto& [k, x] : T) v += x;
  out.value = v;
  out.literal_value = v - T["boundary_dt_phi_transport"];
  out.phi = std::pow(s.mass_unnorm, gamma);
  out.phi_dd = gamma * out.phi * v;
  return out;
}

inline SecondVariation second_variation(const MarginalProblem& p, double t0) {
  auto kin = boundary_kinematics(p.family, t0);
  auto sol = marginal_neumann(p, t0, kin);
  return second_variation_rhs(p, t0, kin, sol);
}

// ---------------------------------------------------------------------------

struct LevelSetDelta {
  double delta, dt_phi, psi, mismatch;
};

inline LevelSetDelta level_set_delta(const JointFunction& phi, const BoundaryKinematics& kin, double t0, const Vec& y,
                                     double tol = 1e-8) {
  double ny = y.norm();
  if (!(ny > 0)) fail(ErrorCode::OutOfRange, "boundary point must be nonzero");
  Vec nrm = y / ny;
  LevelSetDelta d;
  d.delta = -phi.grad_x(t0, y).dot(nrm);
  d.dt_phi = phi.dt(t0, y);
  d.psi = kin.psi;
  d.mismatch = d.dt_phi - d.delta * d.psi;
  if (d.delta < -1e-10 || std::abs(d.mismatch) > tol * (1.0 + std::abs(d.dt_phi)))
    fail(ErrorCode::LevelsetMismatch, "dt Phi != delta psi at the boundary point");
  return d;
}

// ---------------------------------------------------------------------------
// Weighted Reilly formula on the ball of radius R (interval for n = 1), nu = e^{-V}.

struct BochnerResidual {
  double lhs = 0.0, rhs = 0.0, residual = 0.0, scale = 0.0;
  double bulk = 0.0, boundary = 0.0;
};

inline BochnerResidual bochner_residual(const Field& v, int n, double R, const Field& u, const QuadratureSpec& q = {}) {
  auto ball = SymmetricBody::ball(n, R);
  auto mu = WeightedMeasure::lebesgue(n);
  auto dens = [&](const Vec& x) { return std::exp(-v.f(x)); };
  auto lnu = [&](const Vec& x) { return u.hess(x).trace() - v.grad(x).dot(u.grad(x)); };
  BochnerResidual b;
  b.lhs = integrate_body(ball, [&](const Vec& x) { return sqr(lnu(x)) * dens(x); }, mu, q).value;
  b.bulk = integrate_body(ball,
                          [&](const Vec& x) {
                            Mat h = u.hess(x);
                            Vec g = u.grad(x);
                            return (h.squaredNorm() + g.dot(v.hess(x) * g)) * dens(x);
                          },
                          mu, q)
               .value;
  auto boundary_term = [&](const Vec& th) {
    Vec x = R * th;
    Mat P = Mat::Identity(n, n) - th * th.transpose();
    Vec g = u.grad(x);
    double psi = g.dot(th);
    double H = (n - 1) / R - v.grad(x).dot(th);
    Vec gs = P * g;
    Vec gpsi = P * (u.hess(x) * th) + P * g / R;
    return (H * psi * psi + gs.squaredNorm() / R - 2.0 * gs.dot(gpsi)) * dens(x);
  };
  double bd = 0.0;
  if (n == 1) {
    bd = boundary_term(make_vec({1.0})) + boundary_term(make_vec({-1.0}));
  } else {
    auto rule = detail::angular_rule(n, q, {});
    for (std::size_t i = 0; i < rule.dirs.size(); ++i)
      if (rule.fine[i] != 0.0) bd += rule.fine[i] * std::pow(R, n - 1) * boundary_term(rule.dirs[i]);
  }
  b.boundary = bd;
  b.rhs = b.bulk + b.boundary;
  b.residual = b.lhs - b.rhs;
  b.scale = std::max({std::abs(b.lhs), std::abs(b.bulk), std::abs(b.boundary), 1e-300});
  return b;
}

// ---------------------------------------------------------------------------
// Hereditary convexity and the spectral inequality.

// nu proportional to 1_C e^{-U} dmu, C = ball of given radius (or all of R^n).
struct EvenDensity {
  std::optional<double> radius;
  EvenConvexPotential u;
};

namespace detail {

inline double decay_radius_of(const std::function<double(const Vec&)>& pot, int n) {
  const DirectionGrid& g = n == 3 ? DirectionGrid::make(3, 0, 16, 8) : DirectionGrid::make(n, 64);
  double p0 = pot(Vec::Zero(n)), R = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = 0.5;
    while (pot(r * g.dir(i)) - p0 < 45.0 && r < 1e6) r *= 1.15;
    R = std::max(R, r);
  }
  if (R >= 1e6) fail(ErrorCode::NotNonnegative, "density does not decay; measure is not finite");
  return R;
}

// Normalized nu-averages of several integrands at once.
inline std::vector<double> nu_averages(const WeightedMeasure& mu, const EvenDensity& nu,
                                       const std::vector<ScalarField>& fs, const QuadratureSpec& q,
                                       double* err = nullptr) {
  const int n = mu.dim();
  double R = nu.radius ? *nu.radius
                       : decay_radius_of([&](const Vec& x) { return mu.potential_value(x) + nu.u(x); }, n);
  auto ball = SymmetricBody::ball(n, R);
  auto weight = [&](const Vec& x) { return std::exp(-nu.u(x)); };
  auto z = integrate_body(ball, weight, mu, q);
  std::vector<double> out;
  double e = z.error / z.value;
  for (const auto& f : fs) {
    auto r = integrate_body(ball, [&](const Vec& x) { return f(x) * weight(x); }, mu, q);
    out.push_back(r.value / z.value);
    e += r.error / z.value;
  }
  if (err) *err = e;
  return out;
}

inline void check_even_density(const EvenDensity& nu, int n) {
  for (int i = 0; i < 64; ++i) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = 3.0 * (2.0 * halton(i + 1, halton_primes[d]) - 1.0);
    double a = nu.u(x), b = nu.u(Vec(-x));
    if (std::abs(a - b) > 1e-8 * (1.0 + std::abs(a))) fail(ErrorCode::NotEven, "nu is not even");
  }
}

}  // namespace detail

inline CheckReport hereditary_margin(const WeightedMeasure& mu, const EvenDensity& nu, const Field& u,
                                     const QuadratureSpec& q = {}) {
  const int n = mu.dim();
  detail::check_even_density(nu, n);
  auto lmu = [&](const Vec& x) { return lmu_apply(mu, u, x); };
  std::vector<ScalarField> fs = {
      [&](const Vec& x) {
        Vec g = u.grad(x);
        return u.hess(x).squaredNorm() + g.dot(mu.potential(x).hess * g);
      },
      lmu,
      [&](const Vec& x) { return n - mu.potential(x).grad.dot(x); },
  };
  double err = 0.0;
  auto avg = detail::nu_averages(mu, nu, fs, q, &err);
  double lhs = avg[0], A = avg[1], den = avg[2];
  double ratio = std::abs(den) < 1e-12 ? 0.0 : A * A / den;
  CheckReport r;
  r.name = "hereditary";
  r.margin = lhs - ratio;
  r.tolerance = std::max(1e-8, 10.0 * err * (1.0 + std::abs(lhs) + std::abs(ratio)));
  r.verdict = judge(r.margin, r.tolerance, false);
  r.details = {{"hessian_term", lhs}, {"mean_lmu", A}, {"denominator", den}, {"ratio", ratio},
               {"degenerate", std::abs(den) < 1e-12 ? 1.0 : 0.0}};
  return r;
}

inline CheckReport spectral_margin(const WeightedMeasure& mu, const EvenDensity& nu, const Field& v,
                                   const QuadratureSpec& q = {}) {
  if (!mu.is_radial()) fail(ErrorCode::BadConfig, "spectral inequality needs a radial weight");
  const int n = mu.dim();
  detail::check_even_density(nu, n);
  const RadialWeight& w = mu.weight();
  std::vector<ScalarField> fs = {
      [&](const Vec& x) { return v.hess(x).squaredNorm(); },
      [&](const Vec& x) { return w.dw_over_r(x.norm()) * v.grad(x).squaredNorm(); },
  };
  double err = 0.0;
  auto avg = detail::nu_averages(mu, nu, fs, q, &err);
  CheckReport r;
  r.name = "spectral";
  r.margin = avg[0] - avg[1];
  r.tolerance = std::max(1e-8, 10.0 * err * (1.0 + std::abs(avg[0]) + std::abs(avg[1])));
  r.verdict = judge(r.margin, r.tolerance, false);
  r.details = {{"hessian_term", avg[0]}, {"gradient_term", avg[1]}};
  return r;
}

}  // namespace bmlab
