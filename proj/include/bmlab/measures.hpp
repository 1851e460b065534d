#pragma once

#include <string>
#include <variant>
#include <vector>

#include "core.hpp"
#include "report.hpp"

namespace bmlab {

struct Lebesgue {};
struct Gaussian {};
struct PowerWeight {  // r^alpha / alpha
  double alpha;
};
struct HeavyTail {  // b log(1 + r^a)
  double a, b;
};
struct CustomWeight {
  std::function<double(double)> w, dw, d2w;
  std::string label = "custom";
};

class RadialWeight {
 public:
  using Family = std::variant<Lebesgue, Gaussian, PowerWeight, HeavyTail, CustomWeight>;

  RadialWeight() : f_(Lebesgue{}) {}
  RadialWeight(Family f) : f_(std::move(f)) {
    if (auto* p = std::get_if<PowerWeight>(&f_); p && !(p->alpha >= 1.0))
      fail(ErrorCode::BadConfig, "power weight needs alpha >= 1");
    if (auto* h = std::get_if<HeavyTail>(&f_); h && !(h->a > 0 && h->b > 0))
      fail(ErrorCode::BadConfig, "heavy_tail needs a, b > 0");
  }

  static RadialWeight lebesgue() { return {Lebesgue{}}; }
  static RadialWeight gaussian() { return {Gaussian{}}; }
  static RadialWeight power(double alpha) { return {PowerWeight{alpha}}; }
  static RadialWeight heavy_tail(double a, double b) { return {HeavyTail{a, b}}; }
  static RadialWeight custom(std::function<double(double)> w, std::function<double(double)> dw,
                             std::function<double(double)> d2w, std::string label = "custom") {
    return {CustomWeight{std::move(w), std::move(dw), std::move(d2w), std::move(label)}};
  }

  const Family& family() const { return f_; }
  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Lebesgue>) return "lebesgue";
          else if constexpr (std::is_same_v<F, Gaussian>) return "gaussian";
          else if constexpr (std::is_same_v<F, PowerWeight>) return "power";
          else if constexpr (std::is_same_v<F, HeavyTail>) return "heavy_tail";
          else return f.label;
        },
        f_);
  }
  bool is_lebesgue() const { return std::holds_alternative<Lebesgue>(f_); }

  double w(double r) const {
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Lebesgue>) return 0.0;
          else if constexpr (std::is_same_v<F, Gaussian>) return 0.5 * r * r;
          else if constexpr (std::is_same_v<F, PowerWeight>) return std::pow(r, f.alpha) / f.alpha;
          else if constexpr (std::is_same_v<F, HeavyTail>) return f.b * std::log1p(std::pow(r, f.a));
          else return f.w(r);
        },
        f_);
  }

  double dw(double r) const {
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Lebesgue>) return 0.0;
          else if constexpr (std::is_same_v<F, Gaussian>) return r;
          else if constexpr (std::is_same_v<F, PowerWeight>) return std::pow(r, f.alpha - 1.0);
          else if constexpr (std::is_same_v<F, HeavyTail>) {
            double ra = std::pow(r, f.a);
            return r > 0 ? f.b * f.a * ra / r / (1.0 + ra) : (f.a == 1.0 ? f.b : (f.a > 1.0 ? 0.0 : inf_()));
          } else return f.dw(r);
        },
        f_);
  }

  double d2w(double r) const {
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Lebesgue>) return 0.0;
          else if constexpr (std::is_same_v<F, Gaussian>) return 1.0;
          else if constexpr (std::is_same_v<F, PowerWeight>) {
            if (r == 0.0) return f.alpha == 2.0 ? 1.0 : (f.alpha > 2.0 ? 0.0 : inf_());
            return (f.alpha - 1.0) * std::pow(r, f.alpha - 2.0);
          } else if constexpr (std::is_same_v<F, HeavyTail>) {
            if (r == 0.0) return f.a == 2.0 ? 2.0 * f.b : (f.a > 2.0 ? 0.0 : inf_());
            double ra = std::pow(r, f.a);
            return f.b * f.a * std::pow(r, f.a - 2.0) * ((f.a - 1.0) - ra) / sqr(1.0 + ra);
          } else return f.d2w(r);
        },
        f_);
  }

  // w'(r)/r with its limit at r = 0.
  double dw_over_r(double r) const {
    if (r > 0) {
      return std::visit(
          [&](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, PowerWeight>) return std::pow(r, f.alpha - 2.0);
            else if constexpr (std::is_same_v<F, HeavyTail>) {
              double ra = std::pow(r, f.a);
              return f.b * f.a * std::pow(r, f.a - 2.0) / (1.0 + ra);
            } else return dw(r) / r;
          },
          f_);
    }
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Lebesgue>) return 0.0;
          else if constexpr (std::is_same_v<F, Gaussian>) return 1.0;
          else if constexpr (std::is_same_v<F, PowerWeight>) {
            if (f.alpha < 2.0) fail(ErrorCode::SingularOrigin, "power weight with alpha < 2 at the origin");
            return f.alpha == 2.0 ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<F, HeavyTail>) {
            if (f.a < 2.0) fail(ErrorCode::SingularOrigin, "heavy_tail weight with a < 2 at the origin");
            return f.a == 2.0 ? 2.0 * f.b : 0.0;
          } else {
            if (std::abs(f.dw(0.0)) > 1e-14) fail(ErrorCode::SingularOrigin, "custom weight has w'(0) != 0");
            return f.d2w(0.0);
          }
        },
        f_);
  }

  bool smooth_at_origin() const {
    if (auto* p = std::get_if<PowerWeight>(&f_)) return p->alpha >= 2.0;
    if (auto* h = std::get_if<HeavyTail>(&f_)) return h->a >= 2.0;
    if (auto* c = std::get_if<CustomWeight>(&f_)) return std::abs(c->dw(0.0)) <= 1e-14;
    return true;
  }

  bool finite_mass() const {
    if (std::holds_alternative<Lebesgue>(f_)) return false;
    if (auto* h = std::get_if<HeavyTail>(&f_)) return h->a * h->b > 3.0;  // enough for n <= 3
    return true;
  }

  // Radius beyond which e^{-w(r)} r^{n-1} and its tail are negligible (< tol).
  double cutoff(int n, double tol = 1e-13) const {
    if (std::holds_alternative<Lebesgue>(f_)) return inf;
    double r = 1.0;
    for (int k = 0; k < 200; ++k, r *= 1.25) {
      double tail = std::exp(-w(r)) * std::pow(r, n) * (1.0 + 1.0 / std::max(dw(r), 1e-300));
      if (tail < tol && dw(r) * r > n + 1.0) return r;
    }
    return r;
  }

 private:
  static double inf_() { return std::numeric_limits<double>::infinity(); }
  Family f_;
};

struct Potential {
  double w;
  Vec grad;
  Mat hess;
};

// Non-radial product weights W(x) = sum_i w_i(|x_i|).
struct ProductWeight {
  std::vector<RadialWeight> factors;
};

class WeightedMeasure {
 public:
  WeightedMeasure() : n_(1), weight_(RadialWeight{}) {}
  WeightedMeasure(int n, RadialWeight w) : n_(n), weight_(std::move(w)) {
    if (std::holds_alternative<Gaussian>(weight().family())) log_norm_ = 0.5 * n * std::log(2.0 * pi);
  }
  WeightedMeasure(ProductWeight p) : n_(static_cast<int>(p.factors.size())), weight_(std::move(p)) {
    for (const auto& f : product().factors)
      if (std::holds_alternative<Gaussian>(f.family())) log_norm_ += 0.5 * std::log(2.0 * pi);
  }

  static WeightedMeasure lebesgue(int n) { return {n, RadialWeight::lebesgue()}; }
  static WeightedMeasure gaussian(int n) { return {n, RadialWeight::gaussian()}; }

  int dim() const { return n_; }
  bool is_radial() const { return std::holds_alternative<RadialWeight>(weight_); }
  const RadialWeight& weight() const { return std::get<RadialWeight>(weight_); }
  const ProductWeight& product() const { return std::get<ProductWeight>(weight_); }
  bool is_lebesgue() const { return is_radial() && weight().is_lebesgue(); }

  double potential_value(const Vec& x) const {
    if (is_radial()) return weight().w(x.norm());
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += product().factors[i].w(std::abs(x(i)));
    return s;
  }
  // gaussian factors are normalized to probability measures; W itself carries no constant
  double log_normalizer() const { return log_norm_; }
  double density(const Vec& x) const { return std::exp(-potential_value(x) - log_norm_); }

  Potential potential(const Vec& x) const {
    Potential p{potential_value(x), Vec::Zero(n_), Mat::Zero(n_, n_)};
    if (!is_radial()) {
      for (int i = 0; i < n_; ++i) {
        const auto& f = product().factors[i];
        double a = std::abs(x(i));
        if (a == 0.0) {
          if (!f.smooth_at_origin() || std::abs(f.dw(0.0)) > 1e-14)
            fail(ErrorCode::SingularOrigin, "product weight factor is singular at 0");
          p.hess(i, i) = f.d2w(0.0);
        } else {
          p.grad(i) = f.dw(a) * (x(i) > 0 ? 1.0 : -1.0);
          p.hess(i, i) = f.d2w(a);
        }
      }
      return p;
    }
    const RadialWeight& w = weight();
    double r = x.norm();
    Mat I = Mat::Identity(n_, n_);
    if (r == 0.0) {
      double lim = w.dw_over_r(0.0);
      p.hess = lim * I;
      return p;
    }
    Vec xh = x / r;
    double a = w.dw_over_r(r), b = w.d2w(r);
    p.grad = w.dw(r) * xh;
    p.hess = a * (I - xh * xh.transpose()) + b * xh * xh.transpose();
    return p;
  }

  // Truncation radius for whole-space integrals.
  double cutoff(double tol = 1e-13) const {
    if (is_radial()) return weight().cutoff(n_, tol);
    double r = 0.0;
    for (const auto& f : product().factors) r = std::max(r, f.cutoff(1, tol / n_));
    return r * std::sqrt(static_cast<double>(n_));
  }

 private:
  int n_;
  std::variant<RadialWeight, ProductWeight> weight_;
  double log_norm_ = 0.0;
};

inline Potential potential_eval(const WeightedMeasure& mu, const Vec& x) { return mu.potential(x); }

// A scalar field with first and second derivatives.
struct Field {
  ScalarField f;
  VecField grad;
  MatField hess;
};

inline double lmu_apply(const WeightedMeasure& mu, const Field& u, const Vec& x) {
  auto p = mu.potential(x);
  return u.hess(x).trace() - p.grad.dot(u.grad(x));
}

// Samples w' and r^2 w'' + r w' on a geometric grid r in [1e-6, 1e6].
inline CheckReport validate_weight(const RadialWeight& w, int points = 513) {
  double min_dw = inf, min_gc = inf, arg_dw = 0.0, arg_gc = 0.0;
  for (int i = 0; i < points; ++i) {
    double r = std::pow(10.0, -6.0 + 12.0 * i / (points - 1));
    double d1 = w.dw(r), d2 = w.d2w(r);
    double gc = r * r * d2 + r * d1;
    if (!std::isfinite(d1) || !std::isfinite(gc)) continue;
    if (d1 < min_dw) min_dw = d1, arg_dw = r;
    if (gc < min_gc) min_gc = gc, arg_gc = r;
  }
  CheckReport rep;
  rep.name = "validate_weight";
  rep.tolerance = 1e-10;
  rep.margin = std::min(min_dw, min_gc);
  rep.verdict = rep.margin >= -rep.tolerance ? Verdict::Holds : Verdict::Violated;
  rep.details["min_dw"] = min_dw;
  rep.details["argmin_dw"] = arg_dw;
  rep.details["min_geodesic_convexity"] = min_gc;
  rep.details["argmin_geodesic_convexity"] = arg_gc;
  rep.witness = {{"weight", w.name()}};
  return rep;
}

}  // namespace bmlab
