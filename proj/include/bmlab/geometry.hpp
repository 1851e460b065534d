#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace bmlab {

// ---------------------------------------------------------------------------
// Sphere discretization.

class DirectionGrid {
 public:
  DirectionGrid() = default;

  // n=1: {-1,+1}. n=2: m equally spaced angles. n=3: az x polar product grid,
  // Gauss-Legendre in cos(polar).
  static DirectionGrid make(int n, int m = 512, int az = 64, int polar = 32) {
    DirectionGrid g;
    g.n_ = n;
    if (n == 1) {
      g.az_ = 2;
      g.polar_ = 1;
      g.dirs_ = {make_vec({1.0}), make_vec({-1.0})};
      g.w_ = {1.0, 1.0};
    } else if (n == 2) {
      if (m < 4 || m % 2) fail(ErrorCode::BadConfig, "n=2 grid needs an even count >= 4");
      g.az_ = m;
      g.polar_ = 1;
      for (int k = 0; k < m; ++k) {
        double a = 2.0 * pi * k / m;
        g.dirs_.push_back(make_vec({std::cos(a), std::sin(a)}));
        g.w_.push_back(2.0 * pi / m);
      }
    } else if (n == 3) {
      if (az < 4 || az % 2 || polar < 2) fail(ErrorCode::BadConfig, "bad n=3 grid size");
      g.az_ = az;
      g.polar_ = polar;
      const Rule& r = gauss_legendre(polar);
      g.cz_ = r.x;
      for (int i = 0; i < az; ++i) {
        double a = 2.0 * pi * i / az;
        for (int j = 0; j < polar; ++j) {
          double c = r.x[j], s = std::sqrt(std::max(0.0, 1.0 - c * c));
          g.dirs_.push_back(make_vec({s * std::cos(a), s * std::sin(a), c}));
          g.w_.push_back(2.0 * pi / az * r.w[j]);
        }
      }
    } else {
      fail(ErrorCode::BadConfig, "dimension must be 1, 2 or 3");
    }
    return g;
  }

  int dim() const { return n_; }
  std::size_t size() const { return dirs_.size(); }
  const Vec& dir(std::size_t i) const { return dirs_[i]; }
  double weight(std::size_t i) const { return w_[i]; }
  int azimuthal() const { return az_; }
  int polar() const { return polar_; }

  std::size_t antipode(std::size_t i) const {
    if (n_ == 1) return 1 - i;
    if (n_ == 2) return (i + az_ / 2) % az_;
    std::size_t a = i / polar_, j = i % polar_;
    return ((a + az_ / 2) % az_) * polar_ + (polar_ - 1 - j);
  }

  bool same_as(const DirectionGrid& o) const {
    return n_ == o.n_ && az_ == o.az_ && polar_ == o.polar_;
  }

  // Piecewise linear in angle (n=2), bilinear in (azimuth, cos polar) (n=3).
  double interpolate(const std::vector<double>& v, const Vec& th) const {
    if (n_ == 1) return th(0) >= 0 ? v[0] : v[1];
    double a = std::atan2(th(1), th(0));
    if (a < 0) a += 2.0 * pi;
    double fa = a / (2.0 * pi) * az_;
    int i0 = static_cast<int>(std::floor(fa));
    double sa = fa - i0;
    i0 %= az_;
    int i1 = (i0 + 1) % az_;
    if (n_ == 2) return (1.0 - sa) * v[i0] + sa * v[i1];
    double c = std::clamp(th(2), -1.0, 1.0);
    int j0 = 0;
    double sc = 0.0;
    if (c <= cz_.front()) {
      j0 = 0;
    } else if (c >= cz_.back()) {
      j0 = polar_ - 1;
    } else {
      j0 = static_cast<int>(std::upper_bound(cz_.begin(), cz_.end(), c) - cz_.begin()) - 1;
      sc = (c - cz_[j0]) / (cz_[j0 + 1] - cz_[j0]);
    }
    int j1 = std::min(j0 + 1, polar_ - 1);
    auto at = [&](int i, int j) { return v[static_cast<std::size_t>(i) * polar_ + j]; };
    return (1.0 - sa) * ((1.0 - sc) * at(i0, j0) + sc * at(i0, j1)) +
           sa * ((1.0 - sc) * at(i1, j0) + sc * at(i1, j1));
  }

 private:
  int n_ = 0, az_ = 0, polar_ = 0;
  std::vector<Vec> dirs_;
  std::vector<double> w_;
  std::vector<double> cz_;
};

inline const DirectionGrid& default_grid(int n) {
  static const DirectionGrid g1 = DirectionGrid::make(1);
  static const DirectionGrid g2 = DirectionGrid::make(2);
  static const DirectionGrid g3 = DirectionGrid::make(3);
  if (n == 1) return g1;
  if (n == 2) return g2;
  if (n == 3) return g3;
  fail(ErrorCode::BadConfig, "dimension must be 1, 2 or 3");
}

// ---------------------------------------------------------------------------
// Origin-symmetric convex bodies.

class SymmetricBody;

struct EmptyShape {};
struct BallShape {
  double r;
};
struct BoxShape {
  std::vector<double> a;
};
struct EllipsoidShape {
  std::vector<double> a;
};
struct PolygonShape {
  std::vector<Vec> verts;    // hull of the symmetric closure, ccw
  std::vector<Vec> normals;  // outward edge normals
  std::vector<double> offsets;
  std::vector<Vec> input;    // as given
};
struct TabulatedShape {
  std::shared_ptr<const DirectionGrid> grid;
  std::vector<double> h;
};
struct CombinationShape {
  double lambda;
  std::shared_ptr<const SymmetricBody> k, l;
};

namespace detail {

// Convex minimization of a 1-homogeneous convex h over {<eta,th> = 1}.
template <class H>
double golden_min(H&& f, double lo, double hi, int iters = 90) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a); fd = f(d);
    }
  }
  return std::min(fc, fd);
}

inline void orthobasis(const Vec& th, Vec& u, Vec& v) {
  Vec e = Vec::Zero(3);
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(th(i)) < std::abs(th(k))) k = i;
  e(k) = 1.0;
  Eigen::Vector3d t3(th(0), th(1), th(2)), e3(e(0), e(1), e(2));
  Eigen::Vector3d u3 = (e3 - e3.dot(t3) * t3).normalized();
  Eigen::Vector3d v3 = t3.cross(u3);
  u = make_vec({u3(0), u3(1), u3(2)});
  v = make_vec({v3(0), v3(1), v3(2)});
}

}  // namespace detail

class SymmetricBody {
 public:
  using Shape = std::variant<EmptyShape, BallShape, BoxShape, EllipsoidShape, PolygonShape,
                             TabulatedShape, CombinationShape>;

  SymmetricBody() : n_(1), shape_(EmptyShape{}) {}

  static SymmetricBody empty(int n) { return SymmetricBody(n, EmptyShape{}); }

  static SymmetricBody ball(int n, double r) {
    check_dim(n);
    if (!(r > 0) || !std::isfinite(r)) fail(ErrorCode::EmptyBody, "ball radius must be positive");
    if (n == 1) return SymmetricBody(1, BoxShape{{r}});
    return SymmetricBody(n, BallShape{r});
  }

  static SymmetricBody interval(double a) { return box({a}); }

  static SymmetricBody box(std::vector<double> a) {
    check_dim(static_cast<int>(a.size()));
    for (double x : a)
      if (!(x > 0) || !std::isfinite(x)) fail(ErrorCode::EmptyBody, "box half-widths must be positive");
    int n = static_cast<int>(a.size());
    return SymmetricBody(n, BoxShape{std::move(a)});
  }

  static SymmetricBody ellipsoid(std::vector<double> a) {
    check_dim(static_cast<int>(a.size()));
    for (double x : a)
      if (!(x > 0) || !std::isfinite(x)) fail(ErrorCode::EmptyBody, "semi-axes must be positive");
    int n = static_cast<int>(a.size());
    if (n == 1) return box(a);
    return SymmetricBody(n, EllipsoidShape{std::move(a)});
  }

  // Hull of {+v, -v}; planar only.
  static SymmetricBody polygon(const std::vector<Vec>& vs) {
    if (vs.empty()) fail(ErrorCode::EmptyBody, "polygon needs vertices");
    for (const auto& v : vs)
      if (v.size() != 2) fail(ErrorCode::BadConfig, "polygon vertices must be planar");
    std::vector<std::pair<double, double>> pts;
    for (const auto& v : vs) {
      pts.emplace_back(v(0), v(1));
      pts.emplace_back(-v(0), -v(1));
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto cross = [](auto o, auto a, auto b) {
      return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
    };
    std::vector<std::pair<double, double>> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k > 0 ? k - 1 : 0);
    if (hull.size() < 3) fail(ErrorCode::EmptyBody, "polygon has empty interior");
    PolygonShape s;
    s.input = vs;
    for (auto& p : hull) s.verts.push_back(make_vec({p.first, p.second}));
    for (std::size_t i = 0; i < s.verts.size(); ++i) {
      const Vec& a = s.verts[i];
      const Vec& b = s.verts[(i + 1) % s.verts.size()];
      Vec nrm = make_vec({b(1) - a(1), a(0) - b(0)});
      nrm /= nrm.norm();
      double off = nrm.dot(a);
      if (!(off > 0)) fail(ErrorCode::EmptyBody, "polygon does not contain the origin in its interior");
      s.normals.push_back(nrm);
      s.offsets.push_back(off);
    }
    return SymmetricBody(2, std::move(s));
  }

  static SymmetricBody tabulated(std::shared_ptr<const DirectionGrid> grid, std::vector<double> h) {
    if (h.size() != grid->size()) fail(ErrorCode::GridMismatch, "support table size does not match grid");
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (!(h[i] > 0) || !std::isfinite(h[i])) fail(ErrorCode::EmptyBody, "support values must be positive");
      double hb = h[grid->antipode(i)];
      if (std::abs(h[i] - hb) > 1e-12 * std::max(1.0, h[i]))
        fail(ErrorCode::NotEven, "support table is not antipodally symmetric");
    }
    int n = grid->dim();
    return SymmetricBody(n, TabulatedShape{std::move(grid), std::move(h)});
  }

  // Support values of this body sampled on a grid.
  SymmetricBody tabulate(std::shared_ptr<const DirectionGrid> grid) const {
    std::vector<double> h(grid->size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = support(grid->dir(i));
    return tabulated(std::move(grid), std::move(h));
  }

  int dim() const { return n_; }
  bool is_empty() const { return std::holds_alternative<EmptyShape>(shape_); }
  const Shape& shape() const { return shape_; }

  std::string family() const {
    return std::visit(
        [](const auto& s) -> std::string {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, EmptyShape>) return "empty";
          else if constexpr (std::is_same_v<S, BallShape>) return "ball";
          else if constexpr (std::is_same_v<S, BoxShape>) return "box";
          else if constexpr (std::is_same_v<S, EllipsoidShape>) return "ellipsoid";
          else if constexpr (std::is_same_v<S, PolygonShape>) return "polygon";
          else if constexpr (std::is_same_v<S, TabulatedShape>) return "tabulated";
          else return "combination";
        },
        shape_);
  }

  double support(const Vec& th) const {
    check_dir(th);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, EmptyShape>) {
            fail(ErrorCode::EmptyBody, "support of an empty body");
          } else if constexpr (std::is_same_v<S, BallShape>) {
            return s.r;
          } else if constexpr (std::is_same_v<S, BoxShape>) {
            double h = 0.0;
            for (int i = 0; i < n_; ++i) h += s.a[i] * std::abs(th(i));
            return h;
          } else if constexpr (std::is_same_v<S, EllipsoidShape>) {
            double q = 0.0;
            for (int i = 0; i < n_; ++i) q += sqr(s.a[i] * th(i));
            return std::sqrt(q);
          } else if constexpr (std::is_same_v<S, PolygonShape>) {
            double h = -inf;
            for (const auto& v : s.verts) h = std::max(h, v.dot(th));
            return h;
          } else if constexpr (std::is_same_v<S, TabulatedShape>) {
            return s.grid->interpolate(s.h, th);
          } else {
            return s.lambda * s.k->support(th) + (1.0 - s.lambda) * s.l->support(th);
          }
        },
        shape_);
  }

  // rho(th) = max{r : r th in K}.
  double radial(const Vec& th) const {
    check_dir(th);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, EmptyShape>) {
            fail(ErrorCode::EmptyBody, "radial function of an empty body");
          } else if constexpr (std::is_same_v<S, BallShape>) {
            return s.r;
          } else if constexpr (std::is_same_v<S, BoxShape>) {
            double r = inf;
            for (int i = 0; i < n_; ++i)
              if (th(i) != 0.0) r = std::min(r, s.a[i] / std::abs(th(i)));
            return r;
          } else if constexpr (std::is_same_v<S, EllipsoidShape>) {
            double q = 0.0;
            for (int i = 0; i < n_; ++i) q += sqr(th(i) / s.a[i]);
            return 1.0 / std::sqrt(q);
          } else if constexpr (std::is_same_v<S, PolygonShape>) {
            double r = inf;
            for (std::size_t i = 0; i < s.normals.size(); ++i) {
              double c = s.normals[i].dot(th);
              if (c > 1e-300) r = std::min(r, s.offsets[i] / c);
            }
            return r;
          } else if constexpr (std::is_same_v<S, TabulatedShape>) {
            double r = inf;
            for (std::size_t i = 0; i < s.grid->size(); ++i) {
              double c = s.grid->dir(i).dot(th);
              if (c > 1e-12) r = std::min(r, s.h[i] / c);
            }
            return r;
          } else {
            return combination_radial(th);
          }
        },
        shape_);
  }

  bool contains(const Vec& x, double tol = 1e-12) const {
    if (is_empty()) return false;
    double nx = x.norm();
    if (nx == 0.0) return true;
    return nx <= radial(x / nx) * (1.0 + tol);
  }

  // Minkowski gauge |x|_K.
  double gauge(const Vec& x) const {
    double nx = x.norm();
    if (nx == 0.0) return 0.0;
    return nx / radial(x / nx);
  }

  double bounding_radius() const {
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, EmptyShape>) {
            return 0.0;
          } else if constexpr (std::is_same_v<S, BallShape>) {
            return s.r;
          } else if constexpr (std::is_same_v<S, BoxShape> || std::is_same_v<S, EllipsoidShape>) {
            if constexpr (std::is_same_v<S, BoxShape>) {
              double q = 0.0;
              for (double a : s.a) q += a * a;
              return std::sqrt(q);
            } else {
              return *std::max_element(s.a.begin(), s.a.end());
            }
          } else if constexpr (std::is_same_v<S, PolygonShape>) {
            double r = 0.0;
            for (const auto& v : s.verts) r = std::max(r, v.norm());
            return r;
          } else if constexpr (std::is_same_v<S, TabulatedShape>) {
            double r = 0.0;
            for (std::size_t i = 0; i < s.grid->size(); ++i) r = std::max(r, radial(s.grid->dir(i)));
            return r;
          } else {
            return s.lambda * s.k->bounding_radius() + (1.0 - s.lambda) * s.l->bounding_radius();
          }
        },
        shape_);
  }

  // Lower bound on the inradius (min of the support over a direction sample).
  double inradius() const {
    if (is_empty()) return 0.0;
    if (auto* b = std::get_if<BallShape>(&shape_)) return b->r;
    if (auto* b = std::get_if<BoxShape>(&shape_)) return *std::min_element(b->a.begin(), b->a.end());
    if (auto* b = std::get_if<EllipsoidShape>(&shape_)) return *std::min_element(b->a.begin(), b->a.end());
    const DirectionGrid& g = n_ == 3 ? coarse3() : default_grid(n_);
    double r = inf;
    for (std::size_t i = 0; i < g.size(); ++i) r = std::min(r, support(g.dir(i)));
    return r;
  }

  // Angles (n=2) where the radial function has a kink.
  std::vector<double> kink_angles() const {
    std::vector<double> out;
    if (n_ != 2) return out;
    auto angle = [](double x, double y) {
      double a = std::atan2(y, x);
      return a < 0 ? a + 2.0 * pi : a;
    };
    if (auto* b = std::get_if<BoxShape>(&shape_)) {
      for (int sx : {1, -1})
        for (int sy : {1, -1}) out.push_back(angle(sx * b->a[0], sy * b->a[1]));
    } else if (auto* p = std::get_if<PolygonShape>(&shape_)) {
      for (const auto& v : p->verts) out.push_back(angle(v(0), v(1)));
    } else if (auto* c = std::get_if<CombinationShape>(&shape_)) {
      // vertices of a sum of polygons are sums of vertices sharing a normal cone
      auto vk = c->k->vertices2(), vl = c->l->vertices2();
      if (!vk.empty() && !vl.empty()) {
        auto sum = SymmetricBody::polygon(minkowski_vertices(vk, vl, c->lambda));
        return sum.kink_angles();
      }
      // polygon + smooth body: flat pieces meet curved ones where an edge normal
      // of the polygon carries both edge endpoints
      const SymmetricBody* smooth = vk.empty() ? c->k.get() : c->l.get();
      auto& vs = vk.empty() ? vl : vk;
      double wp = vk.empty() ? 1.0 - c->lambda : c->lambda;
      if (!vs.empty() && smooth->vertices2().empty()) {
        std::sort(vs.begin(), vs.end(), [&](const Vec& a, const Vec& b) { return angle(a(0), a(1)) < angle(b(0), b(1)); });
        for (std::size_t i = 0; i < vs.size(); ++i) {
          const Vec& a = vs[i];
          const Vec& b = vs[(i + 1) % vs.size()];
          Vec u = make_vec({b(1) - a(1), a(0) - b(0)});
          u /= u.norm();
          auto xs = smooth->support_point2(u);
          if (!xs) return {};
          for (const Vec* v : {&a, &b}) {
            Vec y = wp * *v + (1.0 - wp) * *xs;
            out.push_back(angle(y(0), y(1)));
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  SymmetricBody scaled(double s) const {
    if (!(s > 0)) fail(ErrorCode::EmptyBody, "scale factor must be positive");
    return std::visit(
        [&](const auto& sh) -> SymmetricBody {
          using S = std::decay_t<decltype(sh)>;
          if constexpr (std::is_same_v<S, EmptyShape>) {
            return *this;
          } else if constexpr (std::is_same_v<S, BallShape>) {
            return ball(n_, sh.r * s);
          } else if constexpr (std::is_same_v<S, BoxShape>) {
            auto a = sh.a;
            for (auto& x : a) x *= s;
            return box(a);
          } else if constexpr (std::is_same_v<S, EllipsoidShape>) {
            auto a = sh.a;
            for (auto& x : a) x *= s;
            return ellipsoid(a);
          } else if constexpr (std::is_same_v<S, PolygonShape>) {
            auto v = sh.input;
            for (auto& x : v) x *= s;
            return polygon(v);
          } else if constexpr (std::is_same_v<S, TabulatedShape>) {
            auto h = sh.h;
            for (auto& x : h) x *= s;
            return tabulated(sh.grid, h);
          } else {
            SymmetricBody out(n_, CombinationShape{sh.lambda,
                                                   std::make_shared<SymmetricBody>(sh.k->scaled(s)),
                                                   std::make_shared<SymmetricBody>(sh.l->scaled(s))});
            return out;
          }
        },
        shape_);
  }

  // Boundary point with outer normal u, for smooth planar bodies.
  std::optional<Vec> support_point2(const Vec& u) const {
    if (auto* b = std::get_if<BallShape>(&shape_)) return Vec(b->r * u);
    if (auto* e = std::get_if<EllipsoidShape>(&shape_)) {
      Vec y = make_vec({e->a[0] * e->a[0] * u(0), e->a[1] * e->a[1] * u(1)});
      return Vec(y / support(u));
    }
    return std::nullopt;
  }

  // Vertex list for planar polygonal bodies (box, polygon, sums thereof); empty otherwise.
  std::vector<Vec> vertices2() const {
    if (n_ != 2) return {};
    if (auto* b = std::get_if<BoxShape>(&shape_))
      return {make_vec({b->a[0], b->a[1]}), make_vec({-b->a[0], b->a[1]}),
              make_vec({-b->a[0], -b->a[1]}), make_vec({b->a[0], -b->a[1]})};
    if (auto* p = std::get_if<PolygonShape>(&shape_)) return p->verts;
    if (auto* c = std::get_if<CombinationShape>(&shape_)) {
      auto vk = c->k->vertices2(), vl = c->l->vertices2();
      if (!vk.empty() && !vl.empty()) return minkowski_vertices(vk, vl, c->lambda);
    }
    return {};
  }

  static SymmetricBody combination(double lambda, const SymmetricBody& k, const SymmetricBody& l) {
    return SymmetricBody(k.dim(), CombinationShape{lambda, std::make_shared<SymmetricBody>(k),
                                                   std::make_shared<SymmetricBody>(l)});
  }

 private:
  SymmetricBody(int n, Shape s) : n_(n), shape_(std::move(s)) {}

  static void check_dim(int n) {
    if (n < 1 || n > 3) fail(ErrorCode::BadConfig, "dimension must be 1, 2 or 3");
  }

  void check_dir(const Vec& th) const {
    if (th.size() != n_) fail(ErrorCode::GridMismatch, "direction has the wrong dimension");
    if (std::abs(th.norm() - 1.0) > 1e-9) fail(ErrorCode::OutOfRange, "direction is not a unit vector");
  }

  static const DirectionGrid& coarse3() {
    static const DirectionGrid g = DirectionGrid::make(3, 0, 32, 16);
    return g;
  }

  // All pairwise sums, hull taken by the polygon constructor.
  static std::vector<Vec> minkowski_vertices(const std::vector<Vec>& a, const std::vector<Vec>& b,
                                             double lambda) {
    std::vector<Vec> out;
    for (const auto& p : a)
      for (const auto& q : b) out.push_back(lambda * p + (1.0 - lambda) * q);
    return out;
  }

  // In projective coordinates eta = th + z (z orthogonal to th), h(eta)/<eta,th>
  // becomes h(th + z), a convex function of z; minimize it.
  double combination_radial(const Vec& th) const {
    const auto& c = std::get<CombinationShape>(shape_);
    auto h = [&](const Vec& eta) {
      double nrm = eta.norm();
      return nrm * (c.lambda * c.k->support(eta / nrm) + (1.0 - c.lambda) * c.l->support(eta / nrm));
    };
    if (n_ == 1) return h(th);
    if (n_ == 2) {
      auto verts = vertices2();
      if (!verts.empty()) return polygon(verts).radial(th);
    }
    double R = bounding_radius(), r0 = std::max(inradius(), 1e-300);
    double B = 2.0 * R / r0 + 1.0;
    if (n_ == 2) {
      Vec perp = make_vec({-th(1), th(0)});
      return detail::golden_min([&](double z) { return h(th + z * perp); }, -B, B);
    }
    Vec u, v;
    detail::orthobasis(th, u, v);
    auto inner = [&](double z1) {
      return detail::golden_min([&](double z2) { return h(th + z1 * u + z2 * v); }, -B, B, 70);
    };
    return detail::golden_min(inner, -B, B, 70);
  }

  int n_;
  Shape shape_;
};

// lambda K + (1-lambda) L, with closed forms where the family is preserved.
inline SymmetricBody minkowski_combine(const SymmetricBody& k, const SymmetricBody& l, double lambda) {
  if (k.dim() != l.dim()) fail(ErrorCode::GridMismatch, "bodies live in different dimensions");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorCode::OutOfRange, "lambda must lie in [0,1]");
  if (k.is_empty() || l.is_empty()) fail(ErrorCode::EmptyBody, "Minkowski combination with an empty body");
  auto* tk = std::get_if<TabulatedShape>(&k.shape());
  auto* tl = std::get_if<TabulatedShape>(&l.shape());
  if (tk && tl) {
    if (!tk->grid->same_as(*tl->grid)) fail(ErrorCode::GridMismatch, "support tables use different grids");
    std::vector<double> h(tk->h.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = lambda * tk->h[i] + (1.0 - lambda) * tl->h[i];
    return SymmetricBody::tabulated(tk->grid, std::move(h));
  }
  if (tk) return minkowski_combine(k, l.tabulate(tk->grid), lambda);
  if (tl) return minkowski_combine(k.tabulate(tl->grid), l, lambda);
  if (lambda == 1.0) return k;
  if (lambda == 0.0) return l;
  const int n = k.dim();
  if (n == 1) {
    Vec e = make_vec({1.0});
    return SymmetricBody::interval(lambda * k.support(e) + (1.0 - lambda) * l.support(e));
  }
  auto* bk = std::get_if<BallShape>(&k.shape());
  auto* bl = std::get_if<BallShape>(&l.shape());
  if (bk && bl) return SymmetricBody::ball(n, lambda * bk->r + (1.0 - lambda) * bl->r);
  auto* xk = std::get_if<BoxShape>(&k.shape());
  auto* xl = std::get_if<BoxShape>(&l.shape());
  if (xk && xl) {
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = lambda * xk->a[i] + (1.0 - lambda) * xl->a[i];
    return SymmetricBody::box(a);
  }
  return SymmetricBody::combination(lambda, k, l);
}

inline double support_eval(const SymmetricBody& k, const Vec& th) { return k.support(th); }
inline double radial_from_support(const SymmetricBody& k, const Vec& th) { return k.radial(th); }

// Largest violation of discrete sublinearity h(a)+h(b) >= |a+b| h((a+b)/|a+b|)
// over neighbouring grid pairs (negative values mean a violation).
inline double sublinearity_defect(const SymmetricBody& k, const DirectionGrid& g) {
  double worst = inf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); j += std::max<std::size_t>(1, g.size() / 64)) {
      Vec s = g.dir(i) + g.dir(j);
      double ns = s.norm();
      if (ns < 1e-9) continue;
      double lhs = k.support(g.dir(i)) + k.support(g.dir(j));
      worst = std::min(worst, lhs - ns * k.support(s / ns));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Even concave functions of x.

struct ConstantCap {
  double c;
};
struct QuadraticCap {  // c - x^T Q x
  double c;
  Mat q;
};
struct PowerCap {  // c - a |x|^p
  double c, a, p;
};
using Cap = std::variant<ConstantCap, QuadraticCap, PowerCap>;
struct MinCaps {
  std::vector<Cap> parts;
};

class ConcaveFunction {
 public:
  using Rule = std::variant<ConstantCap, QuadraticCap, PowerCap, MinCaps>;

  ConcaveFunction() : n_(1), rule_(ConstantCap{1.0}) {}
  ConcaveFunction(int n, Rule r) : n_(n), rule_(std::move(r)) { validate(); }

  static ConcaveFunction constant(int n, double c) { return {n, ConstantCap{c}}; }
  static ConcaveFunction quadratic(double c, Mat q) {
    int n = static_cast<int>(q.rows());
    return {n, QuadraticCap{c, std::move(q)}};
  }
  static ConcaveFunction isotropic(int n, double c, double b) {  // c - b|x|^2
    return {n, QuadraticCap{c, b * Mat::Identity(n, n)}};
  }
  static ConcaveFunction power(int n, double c, double a, double p) { return {n, PowerCap{c, a, p}}; }
  static ConcaveFunction min_of(int n, std::vector<Cap> parts) { return {n, MinCaps{std::move(parts)}}; }

  int dim() const { return n_; }
  const Rule& rule() const { return rule_; }

  double value(const Vec& x) const {
    return std::visit(
        [&](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, MinCaps>) {
            double v = inf;
            for (const auto& c : r.parts) v = std::min(v, cap_value(c, x));
            return v;
          } else {
            return cap_value(Cap(r), x);
          }
        },
        rule_);
  }

  bool smooth() const {
    if (std::holds_alternative<MinCaps>(rule_)) return false;
    if (auto* p = std::get_if<PowerCap>(&rule_)) return p->p >= 2.0 || p->a == 0.0;
    return true;
  }

  bool is_radial() const {
    return std::visit(
        [&](const auto& r) -> bool {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, QuadraticCap>) {
            double s = r.q(0, 0);
            return (r.q - s * Mat::Identity(n_, n_)).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + std::abs(s));
          } else if constexpr (std::is_same_v<R, MinCaps>) {
            return false;
          } else {
            return true;
          }
        },
        rule_);
  }

  Vec gradient(const Vec& x) const {
    if (auto* q = std::get_if<QuadraticCap>(&rule_)) return -(q->q + q->q.transpose()) * x;
    if (std::holds_alternative<ConstantCap>(rule_)) return Vec::Zero(n_);
    if (auto* p = std::get_if<PowerCap>(&rule_)) {
      double r = x.norm();
      if (r == 0.0) return Vec::Zero(n_);
      return -p->a * p->p * std::pow(r, p->p - 2.0) * x;
    }
    return fd_gradient(x);
  }

  Mat hessian(const Vec& x) const {
    if (auto* q = std::get_if<QuadraticCap>(&rule_)) return -(q->q + q->q.transpose());
    if (std::holds_alternative<ConstantCap>(rule_)) return Mat::Zero(n_, n_);
    if (auto* p = std::get_if<PowerCap>(&rule_)) {
      double r = x.norm();
      Mat I = Mat::Identity(n_, n_);
      if (r == 0.0) return p->p == 2.0 ? Mat(-2.0 * p->a * I) : Mat(Mat::Zero(n_, n_));
      Vec xh = x / r;
      double rp = std::pow(r, p->p - 2.0);
      return -p->a * p->p * rp * (I + (p->p - 2.0) * xh * xh.transpose());
    }
    return fd_hessian(x);
  }

  // Largest r with value(r th) >= 0 (concave, so the zero set is a star around 0).
  double zero_radius(const Vec& th) const {
    return std::visit(
        [&](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, MinCaps>) {
            double z = inf;
            for (const auto& c : r.parts) z = std::min(z, cap_zero(c, th));
            return z;
          } else {
            return cap_zero(Cap(r), th);
          }
        },
        rule_);
  }

  double fd_step() const { return 1e-3; }

 private:
  static double cap_value(const Cap& c, const Vec& x) {
    return std::visit(
        [&](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, ConstantCap>) return r.c;
          else if constexpr (std::is_same_v<R, QuadraticCap>) return r.c - x.dot(r.q * x);
          else return r.c - r.a * std::pow(x.norm(), r.p);
        },
        c);
  }

  static double cap_zero(const Cap& c, const Vec& th) {
    return std::visit(
        [&](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if (r.c <= 0.0) return 0.0;
          if constexpr (std::is_same_v<R, ConstantCap>) {
            return inf;
          } else if constexpr (std::is_same_v<R, QuadraticCap>) {
            double q = th.dot(r.q * th);
            return q > 0 ? std::sqrt(r.c / q) : inf;
          } else {
            return r.a > 0 ? std::pow(r.c / r.a, 1.0 / r.p) : inf;
          }
        },
        c);
  }

  void validate() const {
    auto check_cap = [&](const Cap& c) {
      std::visit(
          [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, QuadraticCap>) {
              if (r.q.rows() != n_ || r.q.cols() != n_) fail(ErrorCode::BadConfig, "Q has the wrong size");
              Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (r.q + r.q.transpose()));
              if (es.eigenvalues().minCoeff() < -1e-12) fail(ErrorCode::NotConcave, "Q must be positive semidefinite");
            } else if constexpr (std::is_same_v<R, PowerCap>) {
              if (r.p < 1.0 || r.a < 0.0) fail(ErrorCode::NotConcave, "power cap needs p >= 1, a >= 0");
            }
          },
          c);
    };
    if (auto* m = std::get_if<MinCaps>(&rule_)) {
      if (m->parts.empty()) fail(ErrorCode::BadConfig, "min of zero caps");
      for (const auto& c : m->parts) check_cap(c);
    } else {
      std::visit([&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (!std::is_same_v<R, MinCaps>) check_cap(Cap(r));
      }, rule_);
    }
  }

  // 4th-order central differences.
  Vec fd_gradient(const Vec& x) const {
    double h = fd_step();
    Vec g(n_);
    for (int i = 0; i < n_; ++i) {
      Vec e = unit(n_, i) * h;
      g(i) = (-value(x + 2 * e) + 8 * value(x + e) - 8 * value(x - e) + value(x - 2 * e)) / (12 * h);
    }
    return g;
  }

  Mat fd_hessian(const Vec& x) const {
    double h = fd_step();
    Mat H(n_, n_);
    double f0 = value(x);
    for (int i = 0; i < n_; ++i) {
      Vec e = unit(n_, i) * h;
      H(i, i) = (-value(x + 2 * e) + 16 * value(x + e) - 30 * f0 + 16 * value(x - e) - value(x - 2 * e)) /
                (12 * h * h);
      for (int j = 0; j < i; ++j) {
        Vec d = unit(n_, j) * h;
        auto f = [&](double a, double b) { return value(x + a * e + b * d); };
        double v = (8 * (f(1, -2) + f(2, -1) + f(-2, 1) + f(-1, 2)) - 8 * (f(-1, -2) + f(-2, -1) + f(1, 2) + f(2, 1)) -
                    (f(2, -2) + f(-2, 2) - f(-2, -2) - f(2, 2)) + 64 * (f(-1, -1) + f(1, 1) - f(1, -1) - f(-1, 1))) /
                   (144 * h * h);
        H(i, j) = H(j, i) = v;
      }
    }
    return H;
  }

  int n_;
  Rule rule_;
};

// Sampled midpoint-concavity and evenness defects (both should be >= -tol).
struct ConcavitySample {
  double min_midpoint_gap = inf;
  double max_asymmetry = 0.0;
};

template <class F>
ConcavitySample spot_check_concave(F&& f, const SymmetricBody& k, int samples = 256) {
  ConcavitySample out;
  int n = k.dim();
  double R = k.bounding_radius();
  auto pt = [&](std::uint64_t i, int off) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = (2.0 * halton(i + 1, halton_primes[d + off]) - 1.0) * R;
    return x;
  };
  for (int i = 0; i < samples; ++i) {
    Vec a = pt(i, 0), b = pt(i, 3);
    if (!k.contains(a) || !k.contains(b)) continue;
    out.min_midpoint_gap = std::min(out.min_midpoint_gap, f(0.5 * (a + b)) - 0.5 * (f(a) + f(b)));
    out.max_asymmetry = std::max(out.max_asymmetry, std::abs(f(a) - f(Vec(-a))));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Joint functions Phi(t, x).

// c + p t + a t^2 + b|x|^2 + d|x|^4 + e t|x|^2
struct RadialPoly {
  double c = 1, p = 0, a = 0, b = 0, d = 0, e = 0;
};
struct FrozenInT {
  ConcaveFunction f;
};

class JointFunction {
 public:
  using Rule = std::variant<FrozenInT, RadialPoly>;

  JointFunction() : n_(1), rule_(FrozenInT{ConcaveFunction::constant(1, 1.0)}) {}
  JointFunction(int n, Rule r) : n_(n), rule_(std::move(r)) {}
  static JointFunction frozen(ConcaveFunction f) {
    int n = f.dim();
    return {n, FrozenInT{std::move(f)}};
  }
  static JointFunction radial_poly(int n, RadialPoly r) { return {n, r}; }

  int dim() const { return n_; }
  const Rule& rule() const { return rule_; }

  bool is_radial() const {
    if (auto* f = std::get_if<FrozenInT>(&rule_)) return f->f.is_radial();
    return true;
  }

  // Concave in (t,x) jointly.
  bool is_concave() const {
    if (std::holds_alternative<FrozenInT>(rule_)) return true;
    const auto& r = std::get<RadialPoly>(rule_);
    return r.e == 0.0 && r.a <= 0.0 && r.b <= 0.0 && r.d <= 0.0;
  }

  double value(double t, const Vec& x) const {
    if (auto* f = std::get_if<FrozenInT>(&rule_)) return f->f.value(x);
    const auto& r = std::get<RadialPoly>(rule_);
    double s = x.squaredNorm();
    return r.c + r.p * t + r.a * t * t + (r.b + r.e * t) * s + r.d * s * s;
  }
  double dt(double t, const Vec& x) const {
    if (std::holds_alternative<FrozenInT>(rule_)) return 0.0;
    const auto& r = std::get<RadialPoly>(rule_);
    return r.p + 2 * r.a * t + r.e * x.squaredNorm();
  }
  double dtt(double, const Vec&) const {
    if (std::holds_alternative<FrozenInT>(rule_)) return 0.0;
    return 2.0 * std::get<RadialPoly>(rule_).a;
  }
  Vec grad_x(double t, const Vec& x) const {
    if (auto* f = std::get_if<FrozenInT>(&rule_)) return f->f.gradient(x);
    const auto& r = std::get<RadialPoly>(rule_);
    return (2.0 * (r.b + r.e * t) + 4.0 * r.d * x.squaredNorm()) * x;
  }
  Vec grad_x_dt(double, const Vec& x) const {
    if (std::holds_alternative<FrozenInT>(rule_)) return Vec::Zero(n_);
    return 2.0 * std::get<RadialPoly>(rule_).e * x;
  }
  Mat hess_x(double t, const Vec& x) const {
    if (auto* f = std::get_if<FrozenInT>(&rule_)) return f->f.hessian(x);
    const auto& r = std::get<RadialPoly>(rule_);
    Mat I = Mat::Identity(n_, n_);
    return (2.0 * (r.b + r.e * t) + 4.0 * r.d * x.squaredNorm()) * I + 8.0 * r.d * x * x.transpose();
  }

  // First r in (0, rmax] where value(t, r th) reaches 0, or +inf.
  double zero_radius(double t, const Vec& th) const {
    if (auto* f = std::get_if<FrozenInT>(&rule_)) return f->f.zero_radius(th);
    const auto& r = std::get<RadialPoly>(rule_);
    double c0 = r.c + r.p * t + r.a * t * t, c1 = r.b + r.e * t, c2 = r.d;
    if (c0 <= 0.0) return 0.0;
    // smallest positive root s of c2 s^2 + c1 s + c0
    double s = inf;
    if (c2 == 0.0) {
      if (c1 < 0.0) s = -c0 / c1;
    } else {
      double disc = c1 * c1 - 4 * c2 * c0;
      if (disc >= 0.0) {
        double sq = std::sqrt(disc);
        double q = -0.5 * (c1 + (c1 >= 0 ? sq : -sq));
        double r1 = q / c2, r2 = q != 0.0 ? c0 / q : inf;
        for (double cand : {r1, r2})
          if (cand > 0.0) s = std::min(s, cand);
      }
    }
    return std::isfinite(s) ? std::sqrt(s) : inf;
  }

  // Radial data along the ray r e_1: (Phi, Phi_t, Phi_tt, Phi_r, Phi_rr, Phi_tr).
  struct RadialData {
    double v, t, tt, r, rr, tr;
  };
  RadialData radial_data(double t, double rad) const {
    Vec x = Vec::Zero(n_);
    x(0) = rad;
    Vec e1 = unit(n_, 0);
    return {value(t, x), dt(t, x), dtt(t, x), grad_x(t, x).dot(e1), e1.dot(hess_x(t, x) * e1),
            grad_x_dt(t, x).dot(e1)};
  }

 private:
  int n_;
  Rule rule_;
};

// ---------------------------------------------------------------------------
// Families of sections Omega_t.

struct MinkowskiPath {  // Omega_t = t K + (1 - t) L on [0, 1]
  SymmetricBody k, l;
};
struct RadiusProfile {  // Omega_t = ball of radius r(t) = sqrt(c0 + c1 t - c2 t^2) or affine
  enum Kind { Affine, Quadric } kind = Quadric;
  double c0 = 1, c1 = 0, c2 = 1;
};
struct SuperLevel {  // Omega_t = {x : Phi(t, x) >= level}
  JointFunction phi;
  double level = 0.0;
};

struct SectionRadius {
  double r, dr, d2r;
};

class ConvexDomainFamily {
 public:
  using Rule = std::variant<MinkowskiPath, RadiusProfile, SuperLevel>;

  ConvexDomainFamily() = default;
  ConvexDomainFamily(int n, double lo, double hi, Rule r) : n_(n), lo_(lo), hi_(hi), rule_(std::move(r)) {
    if (!(lo < hi)) fail(ErrorCode::BadConfig, "family interval must be nonempty");
  }

  static ConvexDomainFamily minkowski(SymmetricBody k, SymmetricBody l) {
    int n = k.dim();
    return {n, 0.0, 1.0, MinkowskiPath{std::move(k), std::move(l)}};
  }
  static ConvexDomainFamily disc_sections() {  // unit disc in R^2, sliced in t
    return {1, -1.0, 1.0, RadiusProfile{RadiusProfile::Quadric, 1.0, 0.0, 1.0}};
  }
  static ConvexDomainFamily profile(int n, double lo, double hi, RadiusProfile p) { return {n, lo, hi, p}; }
  static ConvexDomainFamily super_level(JointFunction phi, double level, double lo, double hi) {
    int n = phi.dim();
    return {n, lo, hi, SuperLevel{std::move(phi), level}};
  }

  int dim() const { return n_; }
  double t_lo() const { return lo_; }
  double t_hi() const { return hi_; }
  const Rule& rule() const { return rule_; }

  SymmetricBody section(double t) const {
    if (t < lo_ - 1e-12 || t > hi_ + 1e-12) fail(ErrorCode::OutOfRange, "t outside the family interval");
    if (auto* m = std::get_if<MinkowskiPath>(&rule_)) return minkowski_combine(m->k, m->l, std::clamp(t, 0.0, 1.0));
    if (auto rad = radius(t)) {
      if (!(rad->r > 0)) return SymmetricBody::empty(n_);
      return SymmetricBody::ball(n_, rad->r);
    }
    // non-radial super-level set: radial function by root finding, then tabulated support
    const auto& s = std::get<SuperLevel>(rule_);
    Vec z = Vec::Zero(n_);
    if (!(s.phi.value(t, z) > s.level)) return SymmetricBody::empty(n_);
    auto grid = std::make_shared<DirectionGrid>(n_ == 3 ? DirectionGrid::make(3, 0, 32, 16) : default_grid(n_));
    std::vector<double> rho(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) rho[i] = level_radius(s, t, grid->dir(i));
    std::vector<double> h(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      double best = 0.0;
      for (std::size_t j = 0; j < grid->size(); ++j) best = std::max(best, rho[j] * grid->dir(j).dot(grid->dir(i)));
      h[i] = best;
    }
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::max(h[i], h[grid->antipode(i)]);
    return SymmetricBody::tabulated(grid, std::move(h));
  }

  // Section radius with t-derivatives when the sections are balls.
  std::optional<SectionRadius> radius(double t) const {
    if (auto* p = std::get_if<RadiusProfile>(&rule_)) {
      if (p->kind == RadiusProfile::Affine) return SectionRadius{p->c0 + p->c1 * t, p->c1, 0.0};
      double q = p->c0 + p->c1 * t - p->c2 * t * t;
      if (q <= 0.0) return SectionRadius{0.0, 0.0, 0.0};
      double r = std::sqrt(q), dq = p->c1 - 2 * p->c2 * t, d2q = -2 * p->c2;
      double dr = dq / (2 * r);
      return SectionRadius{r, dr, (d2q - 2 * dr * dr) / (2 * r)};
    }
    if (auto* m = std::get_if<MinkowskiPath>(&rule_)) {
      auto rk = ball_radius(m->k), rl = ball_radius(m->l);
      if (rk && rl) return SectionRadius{t * *rk + (1 - t) * *rl, *rk - *rl, 0.0};
      return std::nullopt;
    }
    const auto& s = std::get<SuperLevel>(rule_);
    if (!s.phi.is_radial()) return std::nullopt;
    Vec e1 = unit(n_, 0);
    double r = level_radius(s, t, e1);
    if (!(r > 0)) return SectionRadius{0.0, 0.0, 0.0};
    auto d = s.phi.radial_data(t, r);
    if (d.r == 0.0) return std::nullopt;
    double dr = -d.t / d.r;
    double d2r = -(d.tt + 2 * d.tr * dr + d.rr * dr * dr) / d.r;
    return SectionRadius{r, dr, d2r};
  }

  // radius when the body is an interval or a round ball
  static std::optional<double> ball_radius(const SymmetricBody& b) {
    if (auto* s = std::get_if<BallShape>(&b.shape())) return s->r;
    if (b.dim() == 1) return b.support(make_vec({1.0}));
    return std::nullopt;
  }

 private:

  double level_radius(const SuperLevel& s, double t, const Vec& th) const {
    auto g = [&](double r) { return s.phi.value(t, r * th) - s.level; };
    if (g(0.0) <= 0.0) return 0.0;
    double hi = 1.0;
    for (int k = 0; k < 200 && g(hi) > 0.0; ++k) hi *= 2.0;
    if (g(hi) > 0.0) fail(ErrorCode::EmptyBody, "super-level set is unbounded");
    double lo = 0.0;
    for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
      double mid = 0.5 * (lo + hi);
      (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  int n_ = 1;
  double lo_ = 0.0, hi_ = 1.0;
  Rule rule_ = RadiusProfile{};
};

inline SymmetricBody section_body(const ConvexDomainFamily& f, double t) { return f.section(t); }

// ---------------------------------------------------------------------------
// sup{ lambda Phi(z) : z in Theta, x in lambda z + (1 - lambda) Omega }, z over a
// tensor grid on Theta (plus x itself when x lies in Theta).

template <class F>
double concave_extension(F&& phi, const SymmetricBody& theta, const SymmetricBody& omega, const Vec& x,
                         int per_axis = 33) {
  const int n = omega.dim();
  if (theta.dim() != n || x.size() != n) fail(ErrorCode::GridMismatch, "dimension mismatch");
  const DirectionGrid& g = n == 3 ? DirectionGrid::make(3, 0, 16, 8) : default_grid(n);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (theta.support(g.dir(i)) >= omega.support(g.dir(i)) - 1e-12)
      fail(ErrorCode::BadNesting, "Theta is not strictly inside Omega");
  if (omega.gauge(x) > 1.0 + 1e-12) fail(ErrorCode::OutOfRange, "x lies outside Omega");

  auto lambda_max = [&](const Vec& z) {
    if ((x - z).norm() < 1e-14) return 1.0;
    auto feasible = [&](double l) { return omega.gauge(x - l * z) <= (1.0 - l) * (1.0 + 1e-13); };
    double lo = 0.0, hi = 1.0;
    if (!feasible(0.0)) return 0.0;
    for (int k = 0; k < 60; ++k) {
      double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
  };

  double best = 0.0;
  if (theta.contains(x, 0.0)) best = std::max(0.0, static_cast<double>(phi(x)));
  Vec box(n);
  for (int d = 0; d < n; ++d) box(d) = theta.support(unit(n, d));
  std::vector<int> idx(n, 0);
  for (;;) {
    Vec z(n);
    for (int d = 0; d < n; ++d) z(d) = box(d) * (-1.0 + 2.0 * idx[d] / (per_axis - 1));
    if (theta.contains(z, 1e-12)) {
      double pz = phi(z);
      if (pz > 0.0) best = std::max(best, lambda_max(z) * pz);
    }
    int d = 0;
    while (d < n && ++idx[d] == per_axis) idx[d++] = 0;
    if (d == n) break;
  }
  return best;
}

}  // namespace bmlab
