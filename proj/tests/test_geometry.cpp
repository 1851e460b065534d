#include <gtest/gtest.h>

#include <cmath>

#include <bmlab/integrate.hpp>
#include <bmlab/rng.hpp>
#include <bmlab/serialize.hpp>

using namespace bmlab;

namespace {

Vec dir2(double a) { return make_vec({std::cos(a), std::sin(a)}); }

Mat rot2(double a) {
  Mat r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

}  // namespace

// --- quadrature rules

TEST(Quadrature, LegendreIntegratesPolynomialsExactly) {
  const Rule& r = gauss_legendre(8);
  for (int k = 0; k <= 15; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], k);
    double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
    EXPECT_NEAR(s, exact, 1e-14) << k;
  }
}

TEST(Quadrature, JacobiWeightMass) {
  // int (1-x)^a (1+x)^b = 2^{a+b+1} B(a+1, b+1)
  for (auto [a, b] : {std::pair{0.0, 1.0}, {1.0, 0.0}, {0.5, 2.0}, {0.0, 3.0}}) {
    const Rule& r = gauss_jacobi(12, a, b);
    double s = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      s += r.w[i];
      m1 += r.w[i] * r.x[i];
    }
    double mass = std::pow(2.0, a + b + 1) * std::beta(a + 1, b + 1);
    EXPECT_NEAR(s, mass, 1e-12 * mass);
    // mean of the Jacobi weight: (b - a) / (a + b + 2)
    EXPECT_NEAR(m1 / s, (b - a) / (a + b + 2), 1e-12);
  }
}

// --- bodies

TEST(Geometry, BoxSupportIsWeightedL1) {
  auto k = SymmetricBody::box({1.5, 0.5});
  for (double a = 0.1; a < 6.3; a += 0.37) {
    Vec th = dir2(a);
    EXPECT_NEAR(support_eval(k, th), 1.5 * std::abs(th(0)) + 0.5 * std::abs(th(1)), 1e-14);
  }
}

TEST(Geometry, RadialOfBallAndEllipsoid) {
  auto b = SymmetricBody::ball(3, 1.7);
  Vec th = make_vec({1, 2, 2}) / 3.0;
  EXPECT_NEAR(radial_from_support(b, th), 1.7, 1e-12);
  auto e = SymmetricBody::ellipsoid({2.0, 1.0});
  for (double a = 0.0; a < 3.2; a += 0.4) {
    Vec t = dir2(a);
    double rho = 1.0 / std::sqrt(sqr(t(0) / 2.0) + sqr(t(1)));
    EXPECT_NEAR(e.radial(t), rho, 1e-9);
    EXPECT_NEAR(e.support(t), std::sqrt(sqr(2 * t(0)) + sqr(t(1))), 1e-12);
  }
}

TEST(Geometry, PolygonSupportIsVertexMaximum) {
  std::vector<Vec> vs = {make_vec({1.0, 0.2}), make_vec({0.3, 0.9}), make_vec({-0.6, 0.7})};
  auto k = SymmetricBody::polygon(vs);
  for (double a = 0.05; a < 6.3; a += 0.29) {
    Vec th = dir2(a);
    double h = 0.0;
    for (const auto& v : vs) h = std::max({h, v.dot(th), -v.dot(th)});
    EXPECT_NEAR(k.support(th), h, 1e-13);
  }
  EXPECT_GE(sublinearity_defect(k, default_grid(2)), -1e-12);
}

TEST(Geometry, MinkowskiSupportIsLinear) {
  auto k = SymmetricBody::box({1.0, 0.4});
  auto l = SymmetricBody::ball(2, 0.7);
  auto c = minkowski_combine(k, l, 0.3);
  for (double a = 0.0; a < 6.3; a += 0.5) {
    Vec th = dir2(a);
    EXPECT_NEAR(c.support(th), 0.3 * k.support(th) + 0.7 * l.support(th), 1e-13);
  }
}

TEST(Geometry, CombinationContainsScaledPoints) {
  auto k = SymmetricBody::box({1.0, 1.0});
  auto c = minkowski_combine(k, k, 0.25);
  EXPECT_TRUE(c.contains(make_vec({0.99, 0.99})));
  EXPECT_FALSE(c.contains(make_vec({1.01, 0.2})));
}

TEST(Geometry, InvalidBodiesThrow) {
  EXPECT_THROW(SymmetricBody::ball(2, -1.0), Error);
  EXPECT_THROW(SymmetricBody::box({1.0, 0.0}), Error);
}

TEST(Geometry, BodyJsonRoundTrip) {
  for (const auto& b : {SymmetricBody::ball(3, 1.25), SymmetricBody::box({1, 2}), SymmetricBody::ellipsoid({1, 0.5}),
                        SymmetricBody::polygon({make_vec({1.0, 0.2}), make_vec({0.1, 0.8})})}) {
    json j = to_json(b);
    EXPECT_EQ(to_json(body_from_json(j)).dump(), j.dump());
  }
  EXPECT_THROW(body_from_json(json::parse(R"({"type":"ball","n":2,"r":1,"color":3})")), Error);
}

TEST(Geometry, ConcaveCapValues) {
  auto f = ConcaveFunction::isotropic(2, 2.0, 0.5);
  Vec x = make_vec({0.6, 0.8});
  EXPECT_NEAR(f.value(x), 1.5, 1e-15);
  EXPECT_NEAR(f.zero_radius(dir2(0.3)), 2.0, 1e-12);
  auto p = ConcaveFunction::power(1, 1.0, 1.0, 4.0);
  EXPECT_NEAR(p.value(make_vec({0.5})), 1.0 - 0.0625, 1e-15);
}

// --- measures

TEST(Measures, PotentialsAndNormalizers) {
  auto g = WeightedMeasure::gaussian(2);
  EXPECT_NEAR(g.log_normalizer(), std::log(2 * pi), 1e-14);
  Vec x = make_vec({0.3, -0.4});
  EXPECT_NEAR(g.density(x), std::exp(-0.125) / (2 * pi), 1e-15);
  WeightedMeasure p(2, RadialWeight::power(4));
  EXPECT_NEAR(p.potential_value(x), std::pow(0.5, 4) / 4, 1e-15);
  WeightedMeasure h(1, RadialWeight::heavy_tail(2, 4));
  EXPECT_NEAR(h.potential_value(make_vec({2.0})), 4 * std::log(5.0), 1e-13);
}

TEST(Measures, WeightValidation) {
  EXPECT_TRUE(validate_weight(RadialWeight::gaussian()).holds());
  EXPECT_TRUE(validate_weight(RadialWeight::power(4)).holds());
  EXPECT_TRUE(validate_weight(RadialWeight::heavy_tail(2, 4)).holds());
}

TEST(Measures, WeightedLaplacianOfQuadratic) {
  // L u = Delta u - <grad W, grad u>; gaussian, u = |x|^2/2 gives n - |x|^2
  auto g = WeightedMeasure::gaussian(3);
  Field u;
  u.f = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  u.grad = [](const Vec& x) { return Vec(x); };
  u.hess = [](const Vec& x) { return Mat(Mat::Identity(x.size(), x.size())); };
  Vec x = make_vec({0.5, 1.0, -0.5});
  EXPECT_NEAR(lmu_apply(g, u, x), 3.0 - x.squaredNorm(), 1e-13);
}

TEST(Measures, GaussianMassesMatchErf) {
  QuadratureSpec q;
  EXPECT_NEAR(measure_body(SymmetricBody::interval(1), WeightedMeasure::gaussian(1), q).value,
              std::erf(1 / std::sqrt(2.0)), 1e-10);
  EXPECT_NEAR(measure_body(SymmetricBody::ball(2, 1), WeightedMeasure::gaussian(2), q).value, 1 - std::exp(-0.5),
              1e-10);
  EXPECT_NEAR(measure_body(SymmetricBody::box({1, 1}), WeightedMeasure::gaussian(2), q).value,
              sqr(std::erf(1 / std::sqrt(2.0))), 1e-9);
  double e1 = std::erf(1 / std::sqrt(2.0)), e2 = std::erf(2 / std::sqrt(2.0)), e5 = std::erf(0.5 / std::sqrt(2.0));
  EXPECT_NEAR(measure_body(SymmetricBody::box({1, 2, 0.5}), WeightedMeasure::gaussian(3), q).value, e1 * e2 * e5, 1e-9);
  // gamma_3(ball r): chi distribution with 3 degrees of freedom
  double r = 1.3;
  double chi3 = std::erf(r / std::sqrt(2.0)) - std::sqrt(2 / pi) * r * std::exp(-r * r / 2);
  EXPECT_NEAR(measure_body(SymmetricBody::ball(3, r), WeightedMeasure::gaussian(3), q).value, chi3, 1e-9);
}

// --- integration

TEST(Integrate, LebesgueVolumes) {
  QuadratureSpec q;
  EXPECT_NEAR(measure_body(SymmetricBody::ball(3, 1), WeightedMeasure::lebesgue(3), q).value, 4 * pi / 3, 1e-10);
  EXPECT_NEAR(measure_body(SymmetricBody::ellipsoid({2, 0.5}), WeightedMeasure::lebesgue(2), q).value, pi, 1e-10);
  EXPECT_NEAR(measure_body(SymmetricBody::box({1, 2, 0.5}), WeightedMeasure::lebesgue(3), q).value, 8.0, 1e-9);
  // Steiner: 0.5 Q + 0.5 B for Q the unit-half-width square
  auto c = minkowski_combine(SymmetricBody::box({1, 1}), SymmetricBody::ball(2, 1), 0.5);
  auto e = measure_body(c, WeightedMeasure::lebesgue(2), q);
  EXPECT_NEAR(e.value, 1.0 + 4 * 0.5 + pi * 0.25, std::max(1e-10, e.error));
  EXPECT_LT(e.error, 1e-5);
}

TEST(Integrate, PowerMassOfParabola) {
  // int_{-1}^{1} (1-x^2)^2 dx = 16/15
  auto w = weighted_power_mass(SymmetricBody::interval(1), ConcaveFunction::isotropic(1, 1, 1), 2,
                               WeightedMeasure::lebesgue(1));
  EXPECT_NEAR(w.value, 16.0 / 15.0, 1e-12);
}

TEST(Integrate, MonteCarloAgreesWithPolar) {
  struct Case {
    SymmetricBody k;
    WeightedMeasure mu;
  };
  std::vector<Case> cases = {{SymmetricBody::interval(1), WeightedMeasure::gaussian(1)},
                             {SymmetricBody::ball(2, 1), WeightedMeasure::gaussian(2)},
                             {SymmetricBody::box({1, 0.5}), WeightedMeasure(2, RadialWeight::power(4))},
                             {SymmetricBody::ball(3, 1.2), WeightedMeasure(3, RadialWeight::heavy_tail(2, 4))}};
  QuadratureSpec polar, mc;
  mc.mode = QuadMode::MonteCarlo;
  mc.mc_samples = 200000;
  mc.seed = 42;
  for (const auto& c : cases) {
    auto a = measure_body(c.k, c.mu, polar);
    auto b = measure_body(c.k, c.mu, mc);
    EXPECT_LE(std::abs(a.value - b.value), 4 * (a.error + b.error)) << to_json(c.k).dump();
  }
}

TEST(Integrate, MonteCarloIsSeedDeterministic) {
  QuadratureSpec mc;
  mc.mode = QuadMode::MonteCarlo;
  mc.mc_samples = 20000;
  mc.seed = 9;
  auto k = SymmetricBody::ball(2, 1);
  auto a = measure_body(k, WeightedMeasure::gaussian(2), mc);
  auto b = measure_body(k, WeightedMeasure::gaussian(2), mc);
  EXPECT_EQ(a.value, b.value);
  mc.seed = 10;
  EXPECT_NE(measure_body(k, WeightedMeasure::gaussian(2), mc).value, a.value);
}

TEST(Integrate, RotationInvariance) {
  Stream rng(5, 0);
  std::vector<Vec> vs = {make_vec({1.0, 0.2}), make_vec({0.3, 0.9}), make_vec({-0.6, 0.7})};
  auto k = SymmetricBody::polygon(vs);
  double base = measure_body(k, WeightedMeasure::gaussian(2)).value;
  for (int i = 0; i < 4; ++i) {
    Mat r = rot2(rng.uniform(0, 2 * pi));
    std::vector<Vec> ws;
    for (const auto& v : vs) ws.push_back(r * v);
    EXPECT_NEAR(measure_body(SymmetricBody::polygon(ws), WeightedMeasure::gaussian(2)).value, base, 1e-8);
  }
}

TEST(Rng, StreamsAreCounterKeyed) {
  Stream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(Stream(7, 3).next_u64(), c.next_u64());
  Stream s(1, 0);
  double m = 0.0;
  for (int i = 0; i < 20000; ++i) m += s.uniform();
  EXPECT_NEAR(m / 20000, 0.5, 0.01);
}
