#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "geometry.hpp"
#include "measures.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace bmlab {

enum class QuadMode { Polar, MonteCarlo };

struct QuadratureSpec {
  QuadMode mode = QuadMode::Polar;
  int radial_order = 64;
  int angular = 512;  // n = 2
  int azimuthal = 64;  // n = 3
  int polar = 32;
  std::size_t mc_samples = 2'000'000;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void validate() const {
    if (radial_order < 2) fail(ErrorCode::BadConfig, "radial order must be >= 2");
    if (angular < 8 || angular % 2) fail(ErrorCode::BadConfig, "angular count must be even and >= 8");
    if (azimuthal < 4 || azimuthal % 4 || polar < 2) fail(ErrorCode::BadConfig, "bad sphere grid size");
    if (mc_samples < 64) fail(ErrorCode::BadConfig, "mc_samples must be >= 64");
  }
};

struct IntegralEstimate {
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
};

// Phi_+^beta factor; rays are cut where Phi reaches zero and the last half of
// the cut ray uses Gauss-Jacobi with exponent beta.
struct PowerClip {
  std::function<double(const Vec&)> phi;
  std::function<double(const Vec&)> zero_radius;  // along a unit direction
  double beta = 1.0;
};

inline PowerClip power_clip(const ConcaveFunction& f, double beta) {
  return {[f](const Vec& x) { return f.value(x); }, [f](const Vec& th) { return f.zero_radius(th); }, beta};
}
inline PowerClip power_clip(const JointFunction& f, double t, double beta) {
  return {[f, t](const Vec& x) { return f.value(t, x); }, [f, t](const Vec& th) { return f.zero_radius(t, th); },
          beta};
}

struct IntegrateOptions {
  const PowerClip* clip = nullptr;
  // integrand, clip and measure are all rotation invariant: a single ray is exact
  bool rotation_invariant = false;
  std::optional<Vec> center;  // integrate over center + K
};

namespace detail {

struct AngularRule {
  std::vector<Vec> dirs;
  std::vector<double> fine, coarse;
};

inline AngularRule angular_rule(int n, const QuadratureSpec& spec, const std::vector<double>& kinks) {
  AngularRule a;
  if (n == 1) {
    a.dirs = {make_vec({1.0}), make_vec({-1.0})};
    a.fine = a.coarse = {1.0, 1.0};
    return a;
  }
  if (n == 2) {
    if (kinks.empty()) {
      int m = spec.angular;
      for (int k = 0; k < m; ++k) {
        double t = 2.0 * pi * k / m;
        a.dirs.push_back(make_vec({std::cos(t), std::sin(t)}));
        a.fine.push_back(2.0 * pi / m);
        a.coarse.push_back(k % 2 == 0 ? 4.0 * pi / m : 0.0);
      }
      return a;
    }
    // Gauss-Legendre per sector between kinks, plus a half-order coarse rule.
    int sectors = static_cast<int>(kinks.size());
    int m = std::max(8, spec.angular / sectors);
    for (int s = 0; s < sectors; ++s) {
      double lo = kinks[s], hi = s + 1 < sectors ? kinks[s + 1] : kinks[0] + 2.0 * pi;
      for (int pass = 0; pass < 2; ++pass) {
        const Rule& r = gauss_legendre(pass == 0 ? m : m / 2);
        double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t i = 0; i < r.size(); ++i) {
          double t = mid + half * r.x[i];
          a.dirs.push_back(make_vec({std::cos(t), std::sin(t)}));
          a.fine.push_back(pass == 0 ? half * r.w[i] : 0.0);
          a.coarse.push_back(pass == 1 ? half * r.w[i] : 0.0);
        }
      }
    }
    return a;
  }
  DirectionGrid g = DirectionGrid::make(3, 0, spec.azimuthal, spec.polar);
  for (std::size_t i = 0; i < g.size(); ++i) {
    a.dirs.push_back(g.dir(i));
    a.fine.push_back(g.weight(i));
    std::size_t az = i / g.polar();
    a.coarse.push_back(az % 2 == 0 ? 2.0 * g.weight(i) : 0.0);
  }
  return a;
}

// 3-d box: cones over the six faces, tensor Gauss-Legendre on each face.
// d omega = a dA / |y|^3 for a face at distance a.
inline AngularRule box_face_rule(const std::vector<double>& a, const QuadratureSpec& spec) {
  AngularRule rule;
  int m = std::max(8, static_cast<int>(std::sqrt(spec.azimuthal * spec.polar / 6.0)));
  for (int ax = 0; ax < 3; ++ax) {
    int u = (ax + 1) % 3, v = (ax + 2) % 3;
    for (double sgn : {1.0, -1.0}) {
      for (int pass = 0; pass < 2; ++pass) {
        const Rule& r = gauss_legendre(pass == 0 ? m : m / 2);
        for (std::size_t i = 0; i < r.size(); ++i) {
          for (std::size_t j = 0; j < r.size(); ++j) {
            Vec y(3);
            y(ax) = sgn * a[ax];
            y(u) = a[u] * r.x[i];
            y(v) = a[v] * r.x[j];
            double ny = y.norm();
            double w = r.w[i] * r.w[j] * a[u] * a[v] * a[ax] / (ny * ny * ny);
            rule.dirs.push_back(y / ny);
            rule.fine.push_back(pass == 0 ? w : 0.0);
            rule.coarse.push_back(pass == 1 ? w : 0.0);
          }
        }
      }
    }
  }
  return rule;
}

inline int panel_count(double len, bool weighted) {
  if (!weighted) return 1;
  return std::clamp(static_cast<int>(std::ceil(len / 4.0)), 1, 32);
}

[[noreturn]] inline void non_finite(const Vec& x) {
  std::string where = "(";
  for (int i = 0; i < x.size(); ++i) where += (i ? ", " : "") + std::to_string(x(i));
  fail(ErrorCode::NonFiniteIntegrand, "integrand is not finite at " + where + ")");
}

// end(th) -> (r_end, jacobi exponent or 0); F(x) is the full integrand incl. density.
template <class End, class F>
IntegralEstimate polar(int n, const Vec& center, End&& end, F&& integrand, const QuadratureSpec& spec,
                       const std::vector<double>& kinks, bool single_ray, bool weighted,
                       const AngularRule* custom = nullptr) {
  IntegralEstimate est;
  auto ray = [&](const Vec& th, int order) {
    auto [re, e] = end(th);
    if (!(re > 0)) return 0.0;
    auto g = [&](double r) {
      Vec x = center + r * th;
      double v = integrand(x);
      ++est.nodes;
      if (!std::isfinite(v)) non_finite(x);
      return n == 1 ? v : v * std::pow(r, n - 1);
    };
    if (e > 0.0) {
      double a = 0.5 * re;
      double inner = integrate_gl(g, 0.0, a, order, panel_count(a, weighted));
      double outer = integrate_jacobi_right([&](double r) { return g(r) / std::pow(re - r, e); }, a, re, e, order);
      return inner + outer;
    }
    return integrate_gl(g, 0.0, re, order, panel_count(re, weighted));
  };
  const int p = spec.radial_order;
  if (single_ray) {
    Vec e1 = unit(n, 0);
    double s = sphere_area(n);
    double fine = ray(e1, 2 * p), coarse = ray(e1, p);
    est.value = s * fine;
    est.error = s * std::abs(fine - coarse);
    return est;
  }
  AngularRule rule = custom ? *custom : angular_rule(n, spec, kinks);
  double fine = 0.0, coarse = 0.0, fine_p = 0.0;
  for (std::size_t i = 0; i < rule.dirs.size(); ++i) {
    double hi = ray(rule.dirs[i], 2 * p);
    if (rule.fine[i] != 0.0) {
      double lo = ray(rule.dirs[i], p);
      fine += rule.fine[i] * hi;
      fine_p += rule.fine[i] * lo;
    }
    coarse += rule.coarse[i] * hi;
  }
  est.value = fine;
  est.error = std::abs(fine - fine_p) + (n == 1 ? 0.0 : std::abs(fine - coarse));
  return est;
}

// Uniform samples in the ball of radius R around center, stratified in eight
// equal-volume shells.
template <class F>
IntegralEstimate monte_carlo(int n, const Vec& center, double R, F&& integrand, const QuadratureSpec& spec) {
  constexpr int shells = 8;
  Stream rng(spec.seed, spec.stream);
  std::size_t per = std::max<std::size_t>(8, spec.mc_samples / shells);
  double vol = ball_volume(n) * std::pow(R, n) / shells;
  IntegralEstimate est;
  double var = 0.0;
  for (int k = 0; k < shells; ++k) {
    double lo = std::pow(R, n) * k / shells, hi = std::pow(R, n) * (k + 1) / shells;
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
      double r = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / n);
      Vec x = center + r * rng.sphere(n);
      double v = integrand(x);
      if (!std::isfinite(v)) non_finite(x);
      double d = v - mean;
      mean += d / (i + 1);
      m2 += d * (v - mean);
    }
    est.value += vol * mean;
    var += vol * vol * (m2 / (per - 1)) / per;
    est.nodes += per;
  }
  est.error = std::sqrt(var);
  return est;
}

}  // namespace detail

// int_{center + K} f dmu, optionally times Phi_+^beta.
inline IntegralEstimate integrate_body(const SymmetricBody& k, const ScalarField& f, const WeightedMeasure& mu,
                                       const QuadratureSpec& spec = {}, const IntegrateOptions& opt = {}) {
  spec.validate();
  const int n = k.dim();
  if (mu.dim() != n) fail(ErrorCode::GridMismatch, "measure and body dimensions differ");
  if (k.is_empty()) return {};
  Vec c = opt.center ? *opt.center : Vec::Zero(n);
  const PowerClip* clip = opt.clip;
  auto integrand = [&](const Vec& x) {
    double v = f(x) * mu.density(x);
    if (clip) {
      double p = clip->phi(x - c);
      v *= p > 0.0 ? std::pow(p, clip->beta) : 0.0;
    }
    return v;
  };
  if (spec.mode == QuadMode::MonteCarlo) {
    return detail::monte_carlo(n, c, k.bounding_radius(),
                               [&](const Vec& x) { return k.contains(x - c, 0.0) ? integrand(x) : 0.0; }, spec);
  }
  auto end = [&](const Vec& th) -> std::pair<double, double> {
    double rho = k.radial(th);
    if (clip) {
      double rz = clip->zero_radius(th);
      if (rz <= rho * (1.0 + 1e-12)) return {std::min(rz, rho), clip->beta};
    }
    return {rho, 0.0};
  };
  bool single = opt.rotation_invariant && !opt.center && mu.is_radial() &&
                (n == 1 || std::holds_alternative<BallShape>(k.shape()));
  std::vector<double> kinks = k.kink_angles();
  if (auto* b = std::get_if<BoxShape>(&k.shape()); b && n == 3 && !single) {
    auto faces = detail::box_face_rule(b->a, spec);
    return detail::polar(n, c, end, integrand, spec, kinks, single, !mu.is_lebesgue(), &faces);
  }
  return detail::polar(n, c, end, integrand, spec, kinks, single, !mu.is_lebesgue());
}

// Whole-space integral, truncated where the weight (or an explicit radius) makes the rest negligible.
inline IntegralEstimate integrate_space(const ScalarField& f, const WeightedMeasure& mu, const QuadratureSpec& spec = {},
                                        std::optional<double> radius = std::nullopt,
                                        bool rotation_invariant = false) {
  spec.validate();
  const int n = mu.dim();
  double R = radius ? *radius : mu.cutoff();
  if (!std::isfinite(R)) fail(ErrorCode::BadConfig, "whole-space integral needs a truncation radius");
  Vec c = Vec::Zero(n);
  auto integrand = [&](const Vec& x) { return f(x) * mu.density(x); };
  if (spec.mode == QuadMode::MonteCarlo) return detail::monte_carlo(n, c, R, integrand, spec);
  auto end = [&](const Vec&) { return std::pair<double, double>{R, 0.0}; };
  return detail::polar(n, c, end, integrand, spec, {}, rotation_invariant && mu.is_radial(), true);
}

inline IntegralEstimate measure_body(const SymmetricBody& k, const WeightedMeasure& mu, const QuadratureSpec& spec = {}) {
  IntegrateOptions opt;
  opt.rotation_invariant = true;
  return integrate_body(k, [](const Vec&) { return 1.0; }, mu, spec, opt);
}

// nu_beta(K) = int_K Phi^beta dmu.
inline IntegralEstimate weighted_power_mass(const SymmetricBody& k, const ConcaveFunction& phi, double beta,
                                            const WeightedMeasure& mu, const QuadratureSpec& spec = {}) {
  if (!(beta > 0)) fail(ErrorCode::BadConfig, "beta must be positive");
  if (k.is_empty()) return {};
  // sampled nonnegativity inside K (boundary included)
  const int n = k.dim();
  const DirectionGrid& g = n == 3 ? DirectionGrid::make(3, 0, 16, 8) : DirectionGrid::make(n, 64);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double rho = k.radial(g.dir(i));
    for (int j = 0; j <= 16; ++j) {
      Vec x = (rho * j / 16.0) * g.dir(i);
      if (phi.value(x) < -1e-12) fail(ErrorCode::NotNonnegative, "Phi is negative inside K");
    }
  }
  PowerClip clip = power_clip(phi, beta);
  IntegrateOptions opt;
  opt.clip = &clip;
  opt.rotation_invariant = phi.is_radial();
  return integrate_body(k, [](const Vec&) { return 1.0; }, mu, spec, opt);
}

}  // namespace bmlab
