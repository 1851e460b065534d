#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fields.hpp"
#include "geometry.hpp"
#include "integrate.hpp"
#include "measures.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "serialize.hpp"
#include "variation.hpp"

namespace bmlab {

// Lambda-weighted power means; k = +inf max, k = 0 geometric, k = -inf min.
inline double kappa_mean(double a, double b, double lambda, double k) {
  if (k == inf) return std::max(a, b);
  if (k == -inf) return std::min(a, b);
  if (k == 0.0) return (a <= 0.0 || b <= 0.0) ? 0.0 : std::pow(a, lambda) * std::pow(b, 1.0 - lambda);
  if (k < 0.0 && (a <= 0.0 || b <= 0.0)) return 0.0;
  return std::pow(lambda * std::pow(a, k) + (1.0 - lambda) * std::pow(b, k), 1.0 / k);
}

// kappa / (1 + n kappa), with the endpoint values.
inline double kappa_n(double kappa, int n) {
  if (kappa == inf) return 1.0 / n;
  double d = 1.0 + n * kappa;
  if (d <= 0.0) return -inf;
  return kappa / d;
}

// ---------------------------------------------------------------------------
// Borell-Brascamp-Lieb

// Nonnegative test functions: ball indicators, gaussian bumps, and power caps
// (c - q|x-m|^2)_+^p, each centred at m.
struct BblField {
  enum Kind { Indicator, Gaussian, Cap } kind = Indicator;
  Vec center = make_vec({0.0});
  double radius = 1.0;           // indicator
  double amp = 1.0, prec = 1.0;  // gaussian: amp exp(-prec |x-m|^2 / 2)
  double c = 1.0, q = 1.0, p = 1.0;

  static BblField indicator(Vec m, double r) {
    BblField f;
    f.kind = Indicator;
    f.center = std::move(m);
    f.radius = r;
    return f;
  }
  static BblField gaussian(Vec m, double amp, double prec) {
    BblField f;
    f.kind = Gaussian;
    f.center = std::move(m);
    f.amp = amp;
    f.prec = prec;
    return f;
  }
  static BblField cap(Vec m, double c, double q, double p) {
    BblField f;
    f.kind = Cap;
    f.center = std::move(m);
    f.c = c;
    f.q = q;
    f.p = p;
    return f;
  }

  int dim() const { return static_cast<int>(center.size()); }

  double operator()(const Vec& x) const {
    double r2 = (x - center).squaredNorm();
    switch (kind) {
      case Indicator: return r2 <= radius * radius * (1.0 + 1e-12) ? 1.0 : 0.0;
      case Gaussian: return amp * std::exp(-0.5 * prec * r2);
      case Cap: {
        double v = c - q * r2;
        return v > 0.0 ? std::pow(v, p) : 0.0;
      }
    }
    return 0.0;
  }

  // radius of the (effective) support around the centre
  double reach() const {
    switch (kind) {
      case Indicator: return radius;
      case Gaussian: return std::sqrt(2.0 * (45.0 + std::max(0.0, std::log(amp))) / prec);
      case Cap: return std::sqrt(c / q);
    }
    return radius;
  }

  IntegralEstimate integral(const WeightedMeasure& mu, const QuadratureSpec& spec) const {
    const int n = dim();
    auto ball = SymmetricBody::ball(n, reach());
    IntegrateOptions opt;
    opt.center = center;
    if (kind == Indicator) return integrate_body(ball, [](const Vec&) { return 1.0; }, mu, spec, opt);
    if (kind == Gaussian) return integrate_body(ball, *this, mu, spec, opt);
    PowerClip clip{[c = c, q = q](const Vec& y) { return c - q * y.squaredNorm(); },
                   [c = c, q = q](const Vec&) { return std::sqrt(c / q); }, p};
    opt.clip = &clip;
    return integrate_body(ball, [](const Vec&) { return 1.0; }, mu, spec, opt);
  }

  void validate() const {
    if (center.size() < 1 || center.size() > 3) fail(ErrorCode::BadConfig, "field dimension must be 1..3");
    if (kind == Indicator && !(radius > 0)) fail(ErrorCode::BadConfig, "indicator radius must be positive");
    if (kind == Gaussian && !(amp > 0 && prec > 0)) fail(ErrorCode::BadConfig, "gaussian needs amp, prec > 0");
    if (kind == Cap && !(c > 0 && q > 0 && p > 0)) fail(ErrorCode::BadConfig, "cap needs c, q, p > 0");
  }
};

inline json to_json(const BblField& f) {
  json j = {{"center", io::vec_json(f.center)}};
  switch (f.kind) {
    case BblField::Indicator:
      j["type"] = "indicator";
      j["r"] = num(f.radius);
      break;
    case BblField::Gaussian:
      j["type"] = "gaussian";
      j["amp"] = num(f.amp);
      j["prec"] = num(f.prec);
      break;
    case BblField::Cap:
      j["type"] = "cap";
      j["c"] = num(f.c);
      j["q"] = num(f.q);
      j["p"] = num(f.p);
      break;
  }
  return j;
}

inline BblField bbl_field_from_json(const json& j, const std::string& where) {
  std::string t = io::get_str(j, "type", where);
  Vec m = io::vec_from(io::req(j, "center", where), where + ".center");
  BblField f;
  if (t == "indicator") {
    io::check_keys(j, {"type", "center", "r"}, where);
    f = BblField::indicator(m, io::get_num(j, "r", where));
  } else if (t == "gaussian") {
    io::check_keys(j, {"type", "center", "amp", "prec"}, where);
    f = BblField::gaussian(m, io::get_num(j, "amp", where, 1.0), io::get_num(j, "prec", where, 1.0));
  } else if (t == "cap") {
    io::check_keys(j, {"type", "center", "c", "q", "p"}, where);
    f = BblField::cap(m, io::get_num(j, "c", where), io::get_num(j, "q", where), io::get_num(j, "p", where));
  } else {
    fail(ErrorCode::BadConfig, where + ".type: unknown field '" + t + "'");
  }
  f.validate();
  return f;
}

struct BblInstance {
  BblField f, g, h;
  double kappa = 0.0;
  double lambda = 0.5;
  WeightedMeasure mu = WeightedMeasure::lebesgue(1);
};

inline json to_json(const BblInstance& b) {
  return {{"f", to_json(b.f)},          {"g", to_json(b.g)},           {"h", to_json(b.h)},
          {"kappa", num(b.kappa)}, {"lambda", num(b.lambda)}, {"measure", to_json(b.mu)}};
}

inline BblInstance bbl_instance_from_json(const json& j, const std::string& where = "instance") {
  io::check_keys(j, {"f", "g", "h", "kappa", "lambda", "measure"}, where);
  BblInstance b;
  b.f = bbl_field_from_json(io::req(j, "f", where), where + ".f");
  b.g = bbl_field_from_json(io::req(j, "g", where), where + ".g");
  b.h = bbl_field_from_json(io::req(j, "h", where), where + ".h");
  b.kappa = io::get_num(j, "kappa", where);
  b.lambda = io::get_num(j, "lambda", where, 0.5);
  int n = b.f.dim();
  b.mu = j.contains("measure") ? measure_from_json(j["measure"], where + ".measure") : WeightedMeasure::lebesgue(n);
  return b;
}

struct BblOptions {
  int hypothesis_samples = 4096;
  std::uint64_t seed = 0;
  QuadratureSpec quad;
};

namespace detail {

// Largest amount by which h(lambda x + (1-lambda) y) falls short of the kappa-mean of f(x), g(y).
inline double bbl_hypothesis_defect(const BblInstance& b, const BblOptions& o) {
  const int n = b.f.dim();
  Stream rng(o.seed, 0x6262ull);
  double worst = -inf;
  auto draw = [&](const BblField& fld) {
    double r = fld.reach() * std::pow(rng.uniform(), 1.0 / n);
    return Vec(fld.center + r * rng.sphere(n));
  };
  for (int i = 0; i < o.hypothesis_samples; ++i) {
    Vec x = draw(b.f), y = draw(b.g);
    double fx = b.f(x), gy = b.g(y);
    if (!(fx * gy > 0.0)) continue;
    double need = kappa_mean(fx, gy, b.lambda, b.kappa);
    double have = b.h(b.lambda * x + (1.0 - b.lambda) * y);
    worst = std::max(worst, (need - have) / (1.0 + need));
  }
  return worst;
}

struct BblMargin {
  double margin, tol, ih, mean, if_, ig;
};

inline BblMargin bbl_margin(const BblInstance& b, const QuadratureSpec& q) {
  const int n = b.f.dim();
  auto ef = b.f.integral(b.mu, q), eg = b.g.integral(b.mu, q), eh = b.h.integral(b.mu, q);
  double kn = kappa_n(b.kappa, n);
  double m = kappa_mean(ef.value, eg.value, b.lambda, kn);
  double mp = kappa_mean(ef.value + ef.error, eg.value + eg.error, b.lambda, kn);
  double mm = kappa_mean(std::max(0.0, ef.value - ef.error), std::max(0.0, eg.value - eg.error), b.lambda, kn);
  double dm = std::max(std::abs(mp - m), std::abs(m - mm));
  return {eh.value - m, eh.error + dm, eh.value, m, ef.value, eg.value};
}

}  // namespace detail

inline CheckReport bbl_check(const BblInstance& b, const BblOptions& o = {}) {
  const int n = b.f.dim();
  b.f.validate();
  b.g.validate();
  b.h.validate();
  if (b.g.dim() != n || b.h.dim() != n || b.mu.dim() != n) fail(ErrorCode::GridMismatch, "dimension mismatch");
  if (!(b.lambda > 0.0 && b.lambda < 1.0)) fail(ErrorCode::OutOfRange, "lambda must lie in (0,1)");
  if (!(b.kappa >= -1.0 / n)) fail(ErrorCode::OutOfRange, "kappa must be >= -1/n");
  CheckReport r;
  r.name = "bbl";
  r.witness = to_json(b);
  double defect = detail::bbl_hypothesis_defect(b, o);
  bool hyp = defect <= 1e-9;
  auto pm = detail::bbl_margin(b, o.quad);
  r.margin = pm.margin;
  r.tolerance = std::max(1e-12, 10.0 * pm.tol);
  bool confirmed = false;
  if (r.margin < -r.tolerance) {
    QuadratureSpec mc = o.quad;
    mc.mode = o.quad.mode == QuadMode::Polar ? QuadMode::MonteCarlo : QuadMode::Polar;
    auto other = detail::bbl_margin(b, mc);
    r.details["margin_other_mode"] = other.margin;
    confirmed = other.margin < -3.0 * other.tol - 1e-12;
  }
  r.verdict = judge(r.margin, r.tolerance, confirmed);
  r.theorem = hyp && b.mu.is_lebesgue();
  r.details["integral_f"] = pm.if_;
  r.details["integral_g"] = pm.ig;
  r.details["integral_h"] = pm.ih;
  r.details["kappa_mean"] = pm.mean;
  r.details["kappa_n"] = kappa_n(b.kappa, n);
  r.details["hypothesis_defect"] = defect;
  r.details["hypothesis_ok"] = hyp ? 1.0 : 0.0;
  return r;
}

// Convenience: the (f, g, h) triple built from a concave-in-(t,x) family.
inline BblInstance bbl_from_caps(int n, double lambda, double kappa, double shift, double c, double q, double p) {
  Vec e = unit(n, 0);
  BblInstance b;
  b.f = BblField::cap(shift * e, c, q, p);
  b.g = BblField::cap(-shift * e, c, q, p);
  b.h = BblField::cap((2.0 * lambda - 1.0) * shift * e, c, q, p);
  b.kappa = kappa;
  b.lambda = lambda;
  b.mu = WeightedMeasure::lebesgue(n);
  return b;
}

// ---------------------------------------------------------------------------
// Dimensional Brunn-Minkowski for nu_beta = Phi^beta mu

struct DimBmInstance {
  SymmetricBody k, l;
  double lambda = 0.5;
  ConcaveFunction phi;
  double beta = 1.0;
  WeightedMeasure mu;
};

inline json to_json(const DimBmInstance& d) {
  return {{"k", to_json(d.k)},     {"l", to_json(d.l)},   {"lambda", num(d.lambda)},
          {"phi", to_json(d.phi)}, {"beta", num(d.beta)}, {"measure", to_json(d.mu)}};
}

inline DimBmInstance dim_bm_from_json(const json& j, const std::string& where = "instance") {
  io::check_keys(j, {"k", "l", "lambda", "phi", "beta", "measure"}, where);
  DimBmInstance d;
  d.k = body_from_json(io::req(j, "k", where), where + ".k");
  d.l = body_from_json(io::req(j, "l", where), where + ".l");
  d.lambda = io::get_num(j, "lambda", where, 0.5);
  d.phi = j.contains("phi") ? concave_from_json(j["phi"], where + ".phi") : ConcaveFunction::constant(d.k.dim(), 1.0);
  d.beta = io::get_num(j, "beta", where, 1.0);
  if (!(d.beta > 0)) fail(ErrorCode::BadConfig, where + ".beta: must be positive");
  d.mu = measure_from_json(io::req(j, "measure", where), where + ".measure");
  return d;
}

namespace detail {

inline bool admissible_weight(const WeightedMeasure& mu) {
  if (!mu.is_radial()) return false;
  const RadialWeight& w = mu.weight();
  if (w.is_lebesgue()) return true;
  if (std::holds_alternative<CustomWeight>(w.family())) return false;
  return validate_weight(w).holds();
}

struct DimBmMargin {
  double margin, tol, mk, ml, mc;
};

inline DimBmMargin dim_bm_margin(const DimBmInstance& d, const QuadratureSpec& q) {
  const int n = d.k.dim();
  double g = 1.0 / (d.beta + n);
  SymmetricBody c = minkowski_combine(d.k, d.l, d.lambda);
  auto ek = weighted_power_mass(d.k, d.phi, d.beta, d.mu, q);
  auto el = weighted_power_mass(d.l, d.phi, d.beta, d.mu, q);
  auto ec = weighted_power_mass(c, d.phi, d.beta, d.mu, q);
  auto pw = [g](double m) { return m > 0.0 ? std::pow(m, g) : 0.0; };
  auto dpw = [g](double m, double e) { return m > 0.0 ? g * std::pow(m, g - 1.0) * e : std::pow(e, g); };
  double margin = pw(ec.value) - d.lambda * pw(ek.value) - (1.0 - d.lambda) * pw(el.value);
  double tol = dpw(ec.value, ec.error) + d.lambda * dpw(ek.value, ek.error) + (1.0 - d.lambda) * dpw(el.value, el.error);
  return {margin, tol, ek.value, el.value, ec.value};
}

}  // namespace detail

inline CheckReport dim_bm_check(const DimBmInstance& d, const QuadratureSpec& q = {}) {
  const int n = d.k.dim();
  if (d.l.dim() != n || d.phi.dim() != n || d.mu.dim() != n) fail(ErrorCode::GridMismatch, "dimension mismatch");
  if (!(d.lambda >= 0.0 && d.lambda <= 1.0)) fail(ErrorCode::OutOfRange, "lambda must lie in [0,1]");
  if (!(d.beta > 0)) fail(ErrorCode::BadConfig, "beta must be positive");
  CheckReport r;
  r.name = "dim_bm";
  r.witness = to_json(d);
  auto m = detail::dim_bm_margin(d, q);
  r.margin = m.margin;
  r.tolerance = std::max(1e-12, 10.0 * m.tol);
  bool confirmed = false;
  if (r.margin < -r.tolerance) {
    QuadratureSpec other = q;
    other.mode = q.mode == QuadMode::Polar ? QuadMode::MonteCarlo : QuadMode::Polar;
    auto o = detail::dim_bm_margin(d, other);
    r.details["margin_other_mode"] = o.margin;
    confirmed = o.margin < -3.0 * o.tol - 1e-12;
  }
  r.verdict = judge(r.margin, r.tolerance, confirmed);
  r.theorem = detail::admissible_weight(d.mu);
  r.details["mass_k"] = m.mk;
  r.details["mass_l"] = m.ml;
  r.details["mass_combination"] = m.mc;
  r.details["exponent"] = 1.0 / (d.beta + n);
  return r;
}

// ---------------------------------------------------------------------------
// Gaussian B-inequality, local form: mu proportional to e^{-V} d gamma_n.

inline CheckReport b_local_margin(const EvenConvexPotential& v, const Vec& diag, const QuadratureSpec& q = {}) {
  const int n = v.dim();
  if (diag.size() != n) fail(ErrorCode::GridMismatch, "D must have n diagonal entries");
  auto gauss = WeightedMeasure::gaussian(n);
  double R = gauss.cutoff();
  auto dens = [&](const Vec& x) { return std::exp(-v(x)); };
  auto xdx = [&](const Vec& x) { return (diag.array() * x.array().square()).sum(); };
  auto xd2x = [&](const Vec& x) { return (diag.array().square() * x.array().square()).sum(); };
  auto z = integrate_space(dens, gauss, q, R);
  auto a = integrate_space([&](const Vec& x) { return xd2x(x) * dens(x); }, gauss, q, R);
  auto m1 = integrate_space([&](const Vec& x) { return xdx(x) * dens(x); }, gauss, q, R);
  auto m2 = integrate_space([&](const Vec& x) { return sqr(xdx(x)) * dens(x); }, gauss, q, R);
  double e2 = a.value / z.value, mean = m1.value / z.value, sec = m2.value / z.value;
  double var = sec - mean * mean;
  CheckReport r;
  r.name = "b_local";
  r.witness = {{"potential", to_json(v)}, {"d", io::vec_json(diag)}};
  r.margin = 2.0 * e2 - var;
  double err = (a.error + m1.error + m2.error + z.error) / z.value;
  r.tolerance = std::max(1e-10, 10.0 * err * (1.0 + std::abs(e2) + std::abs(sec)));
  r.verdict = judge(r.margin, r.tolerance, false);
  r.details["second_moment_term"] = 2.0 * e2;
  r.details["variance"] = var;
  return r;
}

// ---------------------------------------------------------------------------
// Brascamp-Lieb variance inequality, nu proportional to e^{-G} on R^n.

inline CheckReport brascamp_lieb_margin(const Field& g, int n, const Field& f, const QuadratureSpec& q = {},
                                        std::optional<double> radius = std::nullopt) {
  double R = radius ? *radius : detail::decay_radius_of(g.f, n);
  // strict convexity, sampled
  for (int i = 0; i < 512; ++i) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = R * (2.0 * halton(i + 1, halton_primes[d]) - 1.0);
    if (x.norm() > R) continue;
    Eigen::SelfAdjointEigenSolver<Mat> es(g.hess(x), Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 1e-12)) fail(ErrorCode::NotStrictlyLogconcave, "Hessian of G is not positive definite");
  }
  auto leb = WeightedMeasure::lebesgue(n);
  double g0 = g.f(Vec::Zero(n));
  auto dens = [&](const Vec& x) { return std::exp(-(g.f(x) - g0)); };
  auto z = integrate_space(dens, leb, q, R);
  auto lhs = integrate_space(
      [&](const Vec& x) {
        Vec df = f.grad(x);
        return df.dot(g.hess(x).ldlt().solve(df)) * dens(x);
      },
      leb, q, R);
  auto m1 = integrate_space([&](const Vec& x) { return f.f(x) * dens(x); }, leb, q, R);
  auto m2 = integrate_space([&](const Vec& x) { return sqr(f.f(x)) * dens(x); }, leb, q, R);
  double l = lhs.value / z.value, mean = m1.value / z.value, var = m2.value / z.value - mean * mean;
  CheckReport r;
  r.name = "brascamp_lieb";
  r.margin = l - var;
  double err = (lhs.error + m1.error + m2.error + z.error) / z.value;
  r.tolerance = std::max(1e-10, 10.0 * err * (1.0 + std::abs(l) + m2.value / z.value));
  r.verdict = judge(r.margin, r.tolerance, false);
  r.details["energy"] = l;
  r.details["variance"] = var;
  return r;
}

// ---------------------------------------------------------------------------
// Weighted Poincare inequality for nu_beta proportional to Phi^beta 1_C mu.

inline CheckReport poincare_margin(const WeightedMeasure& mu, const SymmetricBody& c, const ConcaveFunction& phi,
                                   double beta, const Field& f, const QuadratureSpec& q = {}) {
  const int n = c.dim();
  if (phi.dim() != n || mu.dim() != n) fail(ErrorCode::GridMismatch, "dimension mismatch");
  if (!(beta > 0)) fail(ErrorCode::BadConfig, "beta must be positive");
  const DirectionGrid& grid = n == 3 ? DirectionGrid::make(3, 0, 8, 4) : DirectionGrid::make(n, 32);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double rho = std::min(c.radial(grid.dir(i)), phi.zero_radius(grid.dir(i)));
    for (int k = 0; k < 8; ++k) {
      Vec x = (rho * (k + 0.5) / 8.0) * grid.dir(i);
      Eigen::SelfAdjointEigenSolver<Mat> es(phi.hessian(x), Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(n - 1) > 1e-9) fail(ErrorCode::NotConcave, "Phi is not concave on C");
    }
  }
  PowerClip clip = power_clip(phi, beta);
  IntegrateOptions opt;
  opt.clip = &clip;
  auto one = [](const Vec&) { return 1.0; };
  auto z = integrate_body(c, one, mu, q, opt);
  auto energy = integrate_body(
      c,
      [&](const Vec& x) {
        double p = phi.value(x);
        if (!(p > 0.0)) return 0.0;
        Vec dg = f.grad(x) * p + f.f(x) * phi.gradient(x);
        Mat a = -phi.hessian(x);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
        Vec y = es.eigenvectors().transpose() * dg;
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
          double ev = es.eigenvalues()(i);
          if (ev > 1e-14) s += y(i) * y(i) / ev;
          else if (std::abs(y(i)) > 1e-14) return inf;
        }
        return s / p;
      },
      mu, q, opt);
  auto m1 = integrate_body(c, f.f, mu, q, opt);
  auto m2 = integrate_body(c, [&](const Vec& x) { return sqr(f.f(x)); }, mu, q, opt);
  double mean = m1.value / z.value, var = m2.value / z.value - mean * mean;
  double e = energy.value / z.value;
  CheckReport r;
  r.name = "poincare";
  r.margin = e + n / (beta + n) * mean * mean - (beta - 1.0) * var;
  double err = (energy.error + m1.error + m2.error + z.error) / z.value;
  r.tolerance = std::max(1e-10, 10.0 * err * (1.0 + std::abs(e) + std::abs(beta - 1.0) * m2.value / z.value));
  r.verdict = judge(r.margin, r.tolerance, false);
  r.theorem = detail::admissible_weight(mu);
  r.witness = {{"body", to_json(c)}, {"phi", to_json(phi)}, {"beta", num(beta)}, {"measure", to_json(mu)}};
  r.details["energy"] = e;
  r.details["mean"] = mean;
  r.details["variance"] = var;
  return r;
}

// ---------------------------------------------------------------------------
// Torsion: L_mu u = -1 in K, u = 0 on the boundary, K an interval or a ball.

struct TorsionSolution {
  int n = 1;
  double radius = 0.0;
  double tau = 0.0;     // int_K u dmu
  double energy = 0.0;  // int_K |grad u|^2 dmu
  std::vector<double> r, u, du;
  std::function<double(double)> u_at, du_at;
};

namespace detail {

// Lebesgue torsion of the rectangle [-a,a] x [-b,b] by Fourier series.
// Mass: single series in x; energy: double sine series (independent truncation).
inline TorsionSolution torsion_rectangle(double a, double b) {
  const double A = 2.0 * a, B = 2.0 * b;
  TorsionSolution s;
  s.n = 2;
  s.radius = 0.0;
  double sum = 0.0;
  for (int m = 1; m < 400; m += 2) sum += std::tanh(m * pi * B / (2.0 * A)) / std::pow(m, 5);
  s.tau = A * A * A * B / 12.0 - 16.0 * std::pow(A, 4) / std::pow(pi, 5) * sum;
  double e = 0.0;
  for (int m = 1; m < 2400; m += 2)
    for (int k = 1; k < 2400; k += 2) e += 1.0 / (sqr(m * k) * (sqr(m / A) + sqr(k / B)));
  s.energy = 64.0 * A * B / std::pow(pi, 6) * e;
  // profile along the x axis through the centre
  s.u_at = [A, B](double x) {
    double y = std::abs(x) < 0.5 * A ? 0.5 * A - std::abs(x) : 0.0;
    double u = 0.5 * y * (A - y);
    for (int m = 1; m < 400; m += 2)
      u -= 4.0 * A * A / (std::pow(pi * m, 3)) * std::sin(m * pi * y / A) / std::cosh(m * pi * B / (2.0 * A));
    return u;
  };
  s.du_at = [u = s.u_at](double x) { return (u(x + 1e-5) - u(x - 1e-5)) / 2e-5; };
  for (int i = 0; i <= 64; ++i) {
    double x = a * i / 64.0;
    s.r.push_back(x);
    s.u.push_back(s.u_at(x));
    s.du.push_back(s.du_at(x));
  }
  return s;
}

}  // namespace detail

inline TorsionSolution torsion_solve(const SymmetricBody& k, const WeightedMeasure& mu) {
  const int n = k.dim();
  if (auto* box = std::get_if<BoxShape>(&k.shape()); box && n == 2) {
    if (!mu.is_lebesgue()) fail(ErrorCode::BadConfig, "weighted torsion needs an interval or a ball");
    return detail::torsion_rectangle(box->a[0], box->a[1]);
  }
  auto a = ConvexDomainFamily::ball_radius(k);
  if (!a) fail(ErrorCode::BadConfig, "torsion needs an interval, a ball or a Lebesgue rectangle");
  if (!mu.is_radial()) fail(ErrorCode::BadConfig, "torsion needs a radial weight");
  const RadialWeight w = mu.weight();
  const double R = *a;
  TorsionSolution s;
  s.n = n;
  s.radius = R;
  // -u'(r) = int_0^r (s/r)^{n-1} e^{w(r)-w(s)} ds
  s.du_at = [=](double r) {
    if (r <= 0.0) return 0.0;
    double wr = w.w(r);
    return -integrate_gl([&](double y) { return std::pow(y / r, n - 1) * std::exp(wr - w.w(y)); }, 0.0, r, 48);
  };
  s.u_at = [=, du = s.du_at](double r) {
    if (r >= R) return 0.0;
    return -integrate_gl(du, r, R, 48);
  };
  auto jac = [n](double r) { return n == 1 ? 1.0 : std::pow(r, n - 1); };
  double area = sphere_area(n) * std::exp(-mu.log_normalizer());
  s.tau = area * integrate_gl([&](double r) { return jac(r) * std::exp(-w.w(r)) * s.u_at(r); }, 0.0, R, 64, 2);
  s.energy = area * integrate_gl([&](double r) { return jac(r) * std::exp(-w.w(r)) * sqr(s.du_at(r)); }, 0.0, R, 64, 2);
  for (int i = 0; i <= 64; ++i) {
    double r = R * i / 64.0;
    s.r.push_back(r);
    s.u.push_back(s.u_at(r));
    s.du.push_back(s.du_at(r));
  }
  return s;
}

inline CheckReport torsion_bm_check(const SymmetricBody& k, const SymmetricBody& l, double lambda,
                                    const WeightedMeasure& mu, bool sqrt_u = false) {
  const int n = k.dim();
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorCode::OutOfRange, "lambda must lie in [0,1]");
  SymmetricBody c = minkowski_combine(k, l, lambda);
  auto tk = torsion_solve(k, mu), tl = torsion_solve(l, mu), tc = torsion_solve(c, mu);
  double g = 1.0 / (n + 2);
  CheckReport r;
  r.name = "torsion_bm";
  r.margin = std::pow(tc.tau, g) - lambda * std::pow(tk.tau, g) - (1.0 - lambda) * std::pow(tl.tau, g);
  double err = std::abs(tc.tau - tc.energy) + std::abs(tk.tau - tk.energy) + std::abs(tl.tau - tl.energy);
  r.tolerance = std::max(1e-10, 10.0 * err);
  r.verdict = judge(r.margin, r.tolerance, false);
  r.theorem = mu.is_lebesgue();
  r.witness = {{"k", to_json(k)}, {"l", to_json(l)}, {"lambda", num(lambda)}, {"measure", to_json(mu)}};
  r.details["tau_k"] = tk.tau;
  r.details["tau_l"] = tl.tau;
  r.details["tau_combination"] = tc.tau;
  if (n == 1 && sqrt_u) {
    // exploratory: concavity of sqrt(u(s, x)) in (s, x) along the path s K + (1-s) L
    double a = tk.radius, b = tl.radius, worst = inf;
    auto su = [&](double s, double x) {
      auto t = torsion_solve(SymmetricBody::interval(s * a + (1.0 - s) * b), mu);
      return std::sqrt(std::max(0.0, t.u_at(std::abs(x))));
    };
    const double h = 1e-2;
    for (int i = 1; i < 8; ++i) {
      double s = i / 8.0;
      double rad = s * a + (1.0 - s) * b;
      for (int j = -3; j <= 3; ++j) {
        double x = rad * j / 4.0;
        double f0 = su(s, x);
        double fss = (su(s + h, x) - 2 * f0 + su(s - h, x)) / (h * h);
        double fxx = (su(s, x + h) - 2 * f0 + su(s, x - h)) / (h * h);
        double fsx = (su(s + h, x + h) - su(s + h, x - h) - su(s - h, x + h) + su(s - h, x - h)) / (4 * h * h);
        double tr = fss + fxx, det = fss * fxx - fsx * fsx;
        double top = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        worst = std::min(worst, -top);
      }
    }
    r.details["sqrt_u_concavity_margin"] = worst;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Lift of Phi^beta to a (n + beta)-dimensional body, beta in {1, 2, 3}.

inline CheckReport lift_check(const SymmetricBody& k, const ConcaveFunction& phi, int beta, const WeightedMeasure& mu,
                              const QuadratureSpec& q = {}) {
  if (beta < 1 || beta > 3) fail(ErrorCode::UnsupportedBeta, "lift needs beta in {1,2,3}");
  const int n = k.dim();
  QuadratureSpec pq = q;
  pq.mode = QuadMode::Polar;
  auto exact = weighted_power_mass(k, phi, beta, mu, pq);
  double pmax = phi.value(Vec::Zero(n));
  double R = k.bounding_radius();
  double box = ball_volume(n) * std::pow(R, n) * ball_volume(beta) * std::pow(pmax, beta);
  Stream rng(q.seed, 0x11f7ull + q.stream);
  double mean = 0.0, m2 = 0.0;
  const std::size_t m = q.mc_samples;
  for (std::size_t i = 0; i < m; ++i) {
    Vec x = (R * std::pow(rng.uniform(), 1.0 / n)) * rng.sphere(n);
    Vec y = (pmax * std::pow(rng.uniform(), 1.0 / beta)) * rng.sphere(beta);
    double v = 0.0;
    if (k.contains(x, 0.0) && y.norm() <= phi.value(x)) v = mu.density(x);
    double d = v - mean;
    mean += d / (i + 1);
    m2 += d * (v - mean);
  }
  double cb = 1.0 / ball_volume(beta);
  double est = cb * box * mean;
  double se = cb * box * std::sqrt(m2 / (m - 1) / m);
  CheckReport r;
  r.name = "lift";
  // holds when the two estimators agree within three standard errors, i.e. margin < 0
  r.margin = std::abs(exact.value - est) - 3.0 * se;
  r.tolerance = 3.0 * se;
  r.verdict = r.margin < 0.0 ? Verdict::Holds : Verdict::Violated;
  r.witness = {{"body", to_json(k)}, {"phi", to_json(phi)}, {"beta", beta}, {"measure", to_json(mu)}};
  r.details["quadrature"] = exact.value;
  r.details["monte_carlo"] = est;
  r.details["standard_error"] = se;
  return r;
}

}  // namespace bmlab
