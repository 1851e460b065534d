#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "core.hpp"

namespace bmlab {

// Nodes/weights on [-1, 1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

namespace detail {

inline Rule build_gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // one more evaluation at the converged node for the weight
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

// Golub-Welsch for the weight (1-x)^a (1+x)^b.
inline Rule build_gauss_jacobi(int n, double a, double b) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double s = 2.0 * k + a + b;
    double diag;
    if (k == 0)
      diag = (b - a) / (a + b + 2.0);
    else
      diag = (b * b - a * a) / (s * (s + 2.0));
    J(k, k) = diag;
    if (k + 1 < n) {
      double kk = k + 1.0;
      double s1 = 2.0 * kk + a + b;
      double num = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b);
      double den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
      double off = std::sqrt(num / den);
      J(k, k + 1) = J(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  double mu0 = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                        std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    r.w[i] = mu0 * sqr(es.eigenvectors()(0, i));
  }
  return r;
}

}  // namespace detail

inline const Rule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(detail::build_gauss_legendre(n));
  return *slot;
}

inline const Rule& gauss_jacobi(int n, double a, double b) {
  if (a == 0.0 && b == 0.0) return gauss_legendre(n);
  static std::mutex mu;
  static std::map<std::tuple<int, double, double>, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, a, b}];
  if (!slot) slot = std::make_unique<Rule>(detail::build_gauss_jacobi(n, a, b));
  return *slot;
}

// Composite Gauss-Legendre on [a,b].
template <class F>
double integrate_gl(F&& f, double a, double b, int order, int panels = 1) {
  const Rule& r = gauss_legendre(order);
  double h = (b - a) / panels, sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h, half = 0.5 * h, mid = lo + half;
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * f(mid + half * r.x[i]);
    sum += half * s;
  }
  return sum;
}

// int_a^b f(r) (b - r)^e dr, exact for polynomial f up to degree 2*order-1.
template <class F>
double integrate_jacobi_right(F&& f, double a, double b, double e, int order) {
  const Rule& r = gauss_jacobi(order, e, 0.0);
  double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double scale = std::pow(half, e + 1.0), s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return scale * s;
}

}  // namespace bmlab
