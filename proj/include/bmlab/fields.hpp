#pragma once

#include <array>
#include <string>
#include <vector>

#include "core.hpp"
#include "measures.hpp"

namespace bmlab {

// Multivariate polynomial in n <= 3 variables.
class Polynomial {
 public:
  struct Term {
    double c;
    std::array<int, 3> e{0, 0, 0};
  };

  Polynomial() = default;
  Polynomial(int n, std::vector<Term> terms) : n_(n), terms_(std::move(terms)) {}

  static Polynomial constant(int n, double c) { return {n, {{c, {0, 0, 0}}}}; }
  static Polynomial linear(const Vec& a) {
    std::vector<Term> t;
    for (int i = 0; i < a.size(); ++i) {
      Term k{a(i), {0, 0, 0}};
      k.e[i] = 1;
      t.push_back(k);
    }
    return {static_cast<int>(a.size()), t};
  }
  static Polynomial half_norm2(int n) {  // |x|^2 / 2
    std::vector<Term> t;
    for (int i = 0; i < n; ++i) {
      Term k{0.5, {0, 0, 0}};
      k.e[i] = 2;
      t.push_back(k);
    }
    return {n, t};
  }

  int dim() const { return n_; }
  const std::vector<Term>& terms() const { return terms_; }
  int degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.e[0] + t.e[1] + t.e[2]);
    return d;
  }
  bool is_even() const {
    for (const auto& t : terms_)
      if ((t.e[0] + t.e[1] + t.e[2]) % 2 && t.c != 0.0) return false;
    return true;
  }

  double operator()(const Vec& x) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.c * mono(x, t.e, -1, -1);
    return s;
  }
  Vec gradient(const Vec& x) const {
    Vec g = Vec::Zero(n_);
    for (const auto& t : terms_)
      for (int i = 0; i < n_; ++i)
        if (t.e[i] > 0) g(i) += t.c * t.e[i] * mono(x, t.e, i, -1);
    return g;
  }
  Mat hessian(const Vec& x) const {
    Mat h = Mat::Zero(n_, n_);
    for (const auto& t : terms_)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          if (i == j) {
            if (t.e[i] > 1) h(i, i) += t.c * t.e[i] * (t.e[i] - 1) * mono(x, t.e, i, i);
          } else if (t.e[i] > 0 && t.e[j] > 0) {
            h(i, j) += t.c * t.e[i] * t.e[j] * mono(x, t.e, i, j);
          }
        }
    return h;
  }

  Field field() const {
    Polynomial p = *this;
    return {[p](const Vec& x) { return p(x); }, [p](const Vec& x) { return p.gradient(x); },
            [p](const Vec& x) { return p.hessian(x); }};
  }

 private:
  // prod x_k^{e_k}, with the exponents of i and j lowered by one each
  double mono(const Vec& x, const std::array<int, 3>& e, int i, int j) const {
    double v = 1.0;
    for (int k = 0; k < n_; ++k) {
      int p = e[k] - (k == i) - (k == j);
      if (p > 0) v *= std::pow(x(k), p);
    }
    return v;
  }

  int n_ = 1;
  std::vector<Term> terms_;
};

// V(x) = sum c_i <x, A_i x> + sum d_j |<v_j, x>|^{p_j}, all c, d >= 0, A_i PSD.
class EvenConvexPotential {
 public:
  struct Quadratic {
    double c;
    Mat a;
  };
  struct Ridge {
    double d;
    Vec v;
    double p;
  };

  EvenConvexPotential() = default;
  EvenConvexPotential(int n, std::vector<Quadratic> q, std::vector<Ridge> r)
      : n_(n), quad_(std::move(q)), ridge_(std::move(r)) {
    for (const auto& x : quad_) {
      if (x.c < 0) fail(ErrorCode::NotConcave, "quadratic coefficient must be >= 0");
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (x.a + x.a.transpose()));
      if (es.eigenvalues().minCoeff() < -1e-12) fail(ErrorCode::NotConcave, "quadratic form must be PSD");
    }
    for (const auto& x : ridge_)
      if (x.d < 0 || x.p < 1.0) fail(ErrorCode::NotConcave, "ridge terms need d >= 0, p >= 1");
  }

  static EvenConvexPotential zero(int n) { return {n, {}, {}}; }

  int dim() const { return n_; }
  const std::vector<Quadratic>& quadratics() const { return quad_; }
  const std::vector<Ridge>& ridges() const { return ridge_; }
  bool twice_differentiable() const {
    for (const auto& r : ridge_)
      if (r.p < 2.0 && r.d > 0) return false;
    return true;
  }

  double operator()(const Vec& x) const {
    double s = 0.0;
    for (const auto& q : quad_) s += q.c * x.dot(q.a * x);
    for (const auto& r : ridge_) s += r.d * std::pow(std::abs(r.v.dot(x)), r.p);
    return s;
  }
  Vec gradient(const Vec& x) const {
    Vec g = Vec::Zero(n_);
    for (const auto& q : quad_) g += q.c * (q.a + q.a.transpose()) * x;
    for (const auto& r : ridge_) {
      double s = r.v.dot(x);
      if (s != 0.0) g += r.d * r.p * std::pow(std::abs(s), r.p - 1.0) * (s > 0 ? 1.0 : -1.0) * r.v;
    }
    return g;
  }
  Mat hessian(const Vec& x) const {
    Mat h = Mat::Zero(n_, n_);
    for (const auto& q : quad_) h += q.c * (q.a + q.a.transpose());
    for (const auto& r : ridge_) {
      double s = std::abs(r.v.dot(x));
      double k = r.p == 2.0 ? 2.0 : (s > 0 ? r.p * (r.p - 1.0) * std::pow(s, r.p - 2.0) : (r.p > 2.0 ? 0.0 : inf));
      h += r.d * k * r.v * r.v.transpose();
    }
    return h;
  }

  Field field() const {
    EvenConvexPotential v = *this;
    return {[v](const Vec& x) { return v(x); }, [v](const Vec& x) { return v.gradient(x); },
            [v](const Vec& x) { return v.hessian(x); }};
  }

 private:
  int n_ = 1;
  std::vector<Quadratic> quad_;
  std::vector<Ridge> ridge_;
};

// Potentials V(t, x) on R^{n+1}, even in x.
// V(t,x) = a t^2/2 + p t + <x, Q x>/2 + sum_j d_j (|s t + <v,x>|^q + |s t - <v,x>|^q)
struct CoupledPotential {
  double a = 0, p = 0;
  Mat q;
  struct Pair {
    double d, s;
    Vec v;
    double q;
  };
  std::vector<Pair> pairs;
};
// V(t,x) = V0(e^t x)
struct BProfilePotential {
  EvenConvexPotential v0;
};

class JointPotential {
 public:
  using Coupled = CoupledPotential;
  using BProfile = BProfilePotential;

  JointPotential() = default;
  static JointPotential zero(int n) {
    JointPotential j;
    j.n_ = n;
    Coupled c;
    c.q = Mat::Zero(n, n);
    j.rule_ = c;
    return j;
  }
  static JointPotential coupled(int n, Coupled c) {
    JointPotential j;
    j.n_ = n;
    if (c.q.size() == 0) c.q = Mat::Zero(n, n);
    j.rule_ = std::move(c);
    return j;
  }
  static JointPotential b_profile(EvenConvexPotential v0) {
    JointPotential j;
    j.n_ = v0.dim();
    j.rule_ = BProfile{std::move(v0)};
    return j;
  }

  int dim() const { return n_; }
  bool is_b_profile() const { return std::holds_alternative<BProfile>(rule_); }
  const std::variant<Coupled, BProfile>& rule() const { return rule_; }

  double value(double t, const Vec& x) const {
    if (auto* b = std::get_if<BProfile>(&rule_)) return b->v0(std::exp(t) * x);
    const auto& c = std::get<Coupled>(rule_);
    double v = 0.5 * c.a * t * t + c.p * t + 0.5 * x.dot(c.q * x);
    for (const auto& pr : c.pairs) {
      double s = pr.v.dot(x);
      v += pr.d * (std::pow(std::abs(pr.s * t + s), pr.q) + std::pow(std::abs(pr.s * t - s), pr.q));
    }
    return v;
  }

  // Gradient in (t, x), length n+1.
  Vec gradient(double t, const Vec& x) const {
    Vec g = Vec::Zero(n_ + 1);
    if (auto* b = std::get_if<BProfile>(&rule_)) {
      double e = std::exp(t);
      Vec gv = b->v0.gradient(e * x);
      g(0) = e * gv.dot(x);
      g.tail(n_) = e * gv;
      return g;
    }
    const auto& c = std::get<Coupled>(rule_);
    g(0) = c.a * t + c.p;
    g.tail(n_) = c.q * x;
    for (const auto& pr : c.pairs) {
      double s = pr.v.dot(x);
      for (int sg : {1, -1}) {
        double z = pr.s * t + sg * s;
        double d = z == 0.0 ? 0.0 : pr.d * pr.q * std::pow(std::abs(z), pr.q - 1.0) * (z > 0 ? 1.0 : -1.0);
        g(0) += d * pr.s;
        g.tail(n_) += d * sg * pr.v;
      }
    }
    return g;
  }

  // Hessian in (t, x), (n+1) x (n+1).
  Mat hessian(double t, const Vec& x) const {
    Mat h = Mat::Zero(n_ + 1, n_ + 1);
    if (auto* b = std::get_if<BProfile>(&rule_)) {
      // D^2 Psi for Psi(t,x) = V0(e^t x)
      double e = std::exp(t);
      Vec y = e * x;
      Vec gv = b->v0.gradient(y);
      Mat hv = b->v0.hessian(y);
      Vec gx = e * gv;  // grad_x Psi
      h(0, 0) = e * e * x.dot(hv * x) + gx.dot(x);
      Vec cross = e * e * hv * x + gx;
      h.block(1, 0, n_, 1) = cross;
      h.block(0, 1, 1, n_) = cross.transpose();
      h.block(1, 1, n_, n_) = e * e * hv;
      return h;
    }
    const auto& c = std::get<Coupled>(rule_);
    h(0, 0) = c.a;
    h.block(1, 1, n_, n_) = c.q;
    for (const auto& pr : c.pairs) {
      double s = pr.v.dot(x);
      for (int sg : {1, -1}) {
        double z = pr.s * t + sg * s;
        double k = pr.q == 2.0 ? 2.0 : (z != 0.0 ? pr.q * (pr.q - 1.0) * std::pow(std::abs(z), pr.q - 2.0) : 0.0);
        Vec u(n_ + 1);
        u(0) = pr.s;
        u.tail(n_) = sg * pr.v;
        h += pr.d * k * u * u.transpose();
      }
    }
    return h;
  }

 private:
  int n_ = 1;
  std::variant<Coupled, BProfile> rule_;
};

}  // namespace bmlab
