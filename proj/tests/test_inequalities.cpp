#include <gtest/gtest.h>

#include <cmath>

#include <bmlab/inequalities.hpp>

using namespace bmlab;

namespace {

double gamma1(double a) { return std::erf(a / std::sqrt(2.0)); }

Field gauss_potential(int n) { return Polynomial::half_norm2(n).field(); }

Field monomial(int n, std::array<int, 3> e, double c = 1.0) { return Polynomial(n, {{c, e}}).field(); }

}  // namespace

// --- kappa means

TEST(KappaMean, Conventions) {
  EXPECT_DOUBLE_EQ(kappa_mean(4, 9, 0.5, inf), 9);
  EXPECT_DOUBLE_EQ(kappa_mean(4, 9, 0.5, -inf), 4);
  EXPECT_NEAR(kappa_mean(4, 9, 0.5, 0.0), 6, 1e-14);
  EXPECT_NEAR(kappa_mean(4, 9, 0.25, 1.0), 0.25 * 4 + 0.75 * 9, 1e-14);
  EXPECT_NEAR(kappa_mean(4, 9, 0.5, -1.0), 1.0 / (0.5 / 4 + 0.5 / 9), 1e-14);
  EXPECT_EQ(kappa_mean(0, 9, 0.5, -1.0), 0.0);
  EXPECT_EQ(kappa_mean(0, 9, 0.5, 0.0), 0.0);
}

TEST(KappaMean, DimensionalExponent) {
  EXPECT_DOUBLE_EQ(kappa_n(inf, 2), 0.5);
  EXPECT_DOUBLE_EQ(kappa_n(0.0, 3), 0.0);
  EXPECT_DOUBLE_EQ(kappa_n(1.0, 1), 0.5);
  EXPECT_EQ(kappa_n(-1.0 / 2, 2), -inf);
}

// --- Borell-Brascamp-Lieb

TEST(Bbl, IdenticalIndicatorsGiveZero) {
  BblInstance b;
  b.f = b.g = b.h = BblField::indicator(make_vec({0.5}), 0.5);
  for (double k : {-1.0, 0.0, 1.0, inf}) {
    b.kappa = k;
    auto r = bbl_check(b);
    EXPECT_NEAR(r.margin, 0.0, 1e-12) << k;
    EXPECT_TRUE(r.holds());
  }
}

TEST(Bbl, PrekopaLeindlerGaussians) {
  // h = sup-convolution of f, g at lambda = 1/2: equality case when precisions agree
  BblInstance b;
  b.f = BblField::gaussian(make_vec({1.0}), 1, 1);
  b.g = BblField::gaussian(make_vec({-1.0}), 1, 1);
  b.h = BblField::gaussian(make_vec({0.0}), 1, 1);
  b.kappa = 0;
  auto r = bbl_check(b);
  EXPECT_NEAR(r.margin, 0.0, 1e-9);
  EXPECT_LE(r.details.at("hypothesis_defect"), 1e-9);
  EXPECT_TRUE(r.theorem);
  // wider h: strictly positive, integral of exp(-x^2/4) minus sqrt(2 pi)
  b.h = BblField::gaussian(make_vec({0.0}), 1, 0.5);
  r = bbl_check(b);
  EXPECT_NEAR(r.margin, std::sqrt(4 * pi) - std::sqrt(2 * pi), 1e-9);
}

TEST(Bbl, TranslatedBallCounterexample) {
  BblInstance c;
  c.f = BblField::indicator(make_vec({0.0}), 1);
  c.g = BblField::indicator(make_vec({20.0}), 1);
  c.h = BblField::indicator(make_vec({10.0}), 1);
  c.kappa = 1;
  c.mu = WeightedMeasure::gaussian(1);
  auto r = bbl_check(c);
  // M_{1/2}(gamma(B), ~0) = gamma(B)/4, gamma(B + 10) ~ 0
  EXPECT_NEAR(r.margin, -gamma1(1) / 4, 1e-9);
  EXPECT_EQ(r.verdict, Verdict::Violated);
  EXPECT_FALSE(r.theorem);
}

TEST(Bbl, KappaBelowRangeRejected) {
  BblInstance b;
  b.f = b.g = b.h = BblField::indicator(make_vec({0.0, 0.0}), 1);
  b.mu = WeightedMeasure::lebesgue(2);
  b.kappa = -0.6;
  EXPECT_THROW(bbl_check(b), Error);
}

TEST(Bbl, InstanceJsonRoundTrip) {
  auto b = bbl_from_caps(2, 0.3, 0.5, 0.4, 1.0, 2.0, 1.5);
  json j = to_json(b);
  EXPECT_EQ(to_json(bbl_instance_from_json(j)).dump(), j.dump());
}

// --- dimensional Brunn-Minkowski

TEST(DimBm, ErfOracle) {
  DimBmInstance d{SymmetricBody::interval(1), SymmetricBody::interval(2), 0.5, ConcaveFunction::constant(1, 1), 1.0,
                  WeightedMeasure::gaussian(1)};
  auto r = dim_bm_check(d);
  double expect = std::sqrt(gamma1(1.5)) - 0.5 * std::sqrt(gamma1(1)) - 0.5 * std::sqrt(gamma1(2));
  EXPECT_NEAR(r.margin, expect, 1e-10);
  EXPECT_NEAR(r.margin, 0.0292, 5e-5);
  EXPECT_TRUE(r.holds());
  EXPECT_TRUE(r.theorem);
}

TEST(DimBm, LebesgueBallsClosedForm) {
  DimBmInstance d{SymmetricBody::ball(2, 1), SymmetricBody::ball(2, 3), 0.4, ConcaveFunction::constant(2, 1), 2.0,
                  WeightedMeasure::lebesgue(2)};
  // nu = Lebesgue, exponent 1/(beta + n) = 1/4, combination radius 2.2
  auto v = [](double r) { return std::pow(pi * r * r, 0.25); };
  EXPECT_NEAR(dim_bm_check(d).margin, v(2.2) - 0.4 * v(1) - 0.6 * v(3), 1e-10);
}

TEST(DimBm, RotationInvariance) {
  auto poly = [](double a) {
    Mat r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return SymmetricBody::polygon({r * make_vec({1.0, 0.2}), r * make_vec({0.3, 0.9}), r * make_vec({-0.6, 0.7})});
  };
  auto phi = ConcaveFunction::isotropic(2, 3.0, 0.4);
  DimBmInstance d{poly(0), SymmetricBody::ellipsoid({1.0, 1.0}), 0.5, phi, 1.5, WeightedMeasure::gaussian(2)};
  double base = dim_bm_check(d).margin;
  for (double a : {0.4, 1.3, 2.9}) {
    d.k = poly(a);
    EXPECT_NEAR(dim_bm_check(d).margin, base, 1e-8) << a;
  }
}

// --- gaussian B-inequality, local form

TEST(BLocal, FlatPotentialIsEquality) {
  for (int n = 1; n <= 3; ++n) {
    auto r = b_local_margin(EvenConvexPotential::zero(n), Vec::Ones(n));
    EXPECT_NEAR(r.margin, 0.0, 1e-8) << n;
    EXPECT_NEAR(r.details.at("second_moment_term"), 2.0 * n, 1e-8);
    EXPECT_NEAR(r.details.at("variance"), 2.0 * n, 1e-8);
  }
}

TEST(BLocal, QuarticRidgeIsStrict) {
  Vec one = make_vec({1.0});
  auto r = b_local_margin(EvenConvexPotential(1, {}, {{1, one, 4}}), one);
  EXPECT_GT(r.margin, 1e-3);
}

TEST(BLocal, ScaledGaussianClosedForm) {
  // V = c x^2: mu = N(0, s2), s2 = 1/(1+2c); 2 E x^2 - Var x^2 = 2 s2 - 2 s2^2
  double c = 0.75, s2 = 1 / (1 + 2 * c);
  auto r = b_local_margin(EvenConvexPotential(1, {{c, Mat::Identity(1, 1)}}, {}), make_vec({1.0}));
  EXPECT_NEAR(r.margin, 2 * s2 - 2 * s2 * s2, 1e-9);
}

// --- Brascamp-Lieb

TEST(BrascampLieb, LinearIsSaturated) {
  auto r = brascamp_lieb_margin(gauss_potential(1), 1, Polynomial::linear(make_vec({1.0})).field());
  EXPECT_NEAR(r.margin, 0.0, 1e-8);
  auto r2 = brascamp_lieb_margin(gauss_potential(2), 2, Polynomial::linear(make_vec({0.3, -2.0})).field());
  EXPECT_NEAR(r2.margin, 0.0, 1e-8);
}

TEST(BrascampLieb, QuadraticUnderGaussian) {
  // f = x^2: E f'^2 = 4, Var = 2
  auto r = brascamp_lieb_margin(gauss_potential(1), 1, monomial(1, {2, 0, 0}));
  EXPECT_NEAR(r.margin, 2.0, 1e-9);
}

TEST(BrascampLieb, NonStrictPotentialRejected) {
  try {
    brascamp_lieb_margin(Polynomial::constant(1, 0.0).field(), 1, monomial(1, {1, 0, 0}), {}, 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotStrictlyLogconcave);
  }
}

// --- weighted Poincare

TEST(Poincare, ConstantPhiReducesToVarianceBound) {
  // Phi = 1, beta = 1: margin = n/(1+n) mean^2 >= 0, energy term vanishes only if grad f is 0
  auto r = poincare_margin(WeightedMeasure::lebesgue(1), SymmetricBody::interval(1), ConcaveFunction::isotropic(1, 1, 1),
                           2.0, monomial(1, {2, 0, 0}));
  EXPECT_GE(r.margin, -r.tolerance);
  EXPECT_TRUE(r.theorem);
  EXPECT_THROW(poincare_margin(WeightedMeasure::lebesgue(1), SymmetricBody::interval(1),
                               ConcaveFunction::power(1, 1, -1, 2), 2.0, monomial(1, {2, 0, 0})),
               Error);
}

// --- torsion

TEST(Torsion, IntervalAndDisc) {
  for (double a : {0.5, 1.0, 1.5}) {
    auto t = torsion_solve(SymmetricBody::interval(a), WeightedMeasure::lebesgue(1));
    EXPECT_NEAR(t.tau, 2 * a * a * a / 3, 1e-9);
    EXPECT_NEAR(t.energy, t.tau, 1e-9);
    EXPECT_NEAR(t.u_at(0), a * a / 2, 1e-12);
  }
  for (double r : {0.7, 1.0, 1.3}) {
    auto t = torsion_solve(SymmetricBody::ball(2, r), WeightedMeasure::lebesgue(2));
    EXPECT_NEAR(t.tau, pi * std::pow(r, 4) / 8, 1e-9);
    EXPECT_NEAR(t.energy, t.tau, 1e-9);
  }
  auto t3 = torsion_solve(SymmetricBody::ball(3, 1), WeightedMeasure::lebesgue(3));
  EXPECT_NEAR(t3.tau, 4 * pi / 45, 1e-9);  // u = (1 - r^2)/6
}

TEST(Torsion, SquareMatchesSaintVenantConstant) {
  // torsion constant of a square of side s: 0.1405770 s^4 (with Delta phi = -2), i.e. int u = 0.1405770 s^4 / 4
  auto t = torsion_solve(SymmetricBody::box({1, 1}), WeightedMeasure::lebesgue(2));
  EXPECT_NEAR(t.tau, 0.1405770 * 16 / 4, 2e-6);
  EXPECT_NEAR(t.energy, t.tau, 1e-9);
}

TEST(Torsion, WeightedEnergyEqualsMass) {
  for (const auto& mu : {WeightedMeasure::gaussian(1), WeightedMeasure(1, RadialWeight::power(4)),
                         WeightedMeasure(1, RadialWeight::heavy_tail(2, 4))}) {
    auto t = torsion_solve(SymmetricBody::interval(1.2), mu);
    EXPECT_NEAR(t.energy, t.tau, 1e-9);
  }
  for (const auto& mu : {WeightedMeasure::gaussian(2), WeightedMeasure(2, RadialWeight::power(4))}) {
    auto t = torsion_solve(SymmetricBody::ball(2, 1.1), mu);
    EXPECT_NEAR(t.energy, t.tau, 1e-9);
  }
}

TEST(Torsion, BorellHomothetsAreEquality) {
  auto r = torsion_bm_check(SymmetricBody::interval(1), SymmetricBody::interval(2), 0.5, WeightedMeasure::lebesgue(1));
  EXPECT_LE(std::abs(r.margin), 1e-9);
  r = torsion_bm_check(SymmetricBody::ball(2, 0.5), SymmetricBody::ball(2, 1.5), 0.3, WeightedMeasure::lebesgue(2));
  EXPECT_LE(std::abs(r.margin), 1e-9);
  r = torsion_bm_check(SymmetricBody::box({3, 0.5}), SymmetricBody::box({0.5, 2}), 0.5, WeightedMeasure::lebesgue(2));
  EXPECT_GT(r.margin, 0.0);
  EXPECT_TRUE(r.theorem);
}

TEST(Torsion, WeightedCheckIsExploratory) {
  auto r = torsion_bm_check(SymmetricBody::interval(1), SymmetricBody::interval(2), 0.5, WeightedMeasure::gaussian(1));
  EXPECT_FALSE(r.theorem);
}

// --- lift

TEST(Lift, ParabolaMatchesMonteCarlo) {
  auto r = lift_check(SymmetricBody::interval(1), ConcaveFunction::isotropic(1, 1, 1), 2, WeightedMeasure::lebesgue(1));
  EXPECT_NEAR(r.details.at("quadrature"), 16.0 / 15.0, 1e-12);
  EXPECT_LT(r.margin, 0.0);
  EXPECT_TRUE(r.holds());
}

TEST(Lift, ConstantPhiCylinder) {
  auto r = lift_check(SymmetricBody::interval(1), ConcaveFunction::constant(1, 1), 1, WeightedMeasure::lebesgue(1));
  EXPECT_NEAR(r.details.at("quadrature"), 2.0, 1e-14);
  EXPECT_NEAR(r.details.at("monte_carlo"), 2.0, 1e-12);  // C = K x [-1, 1] fills the sampling box
}

TEST(Lift, GaussianAgreesWithinThreeSigma) {
  QuadratureSpec q;
  q.mc_samples = 400000;
  auto r = lift_check(SymmetricBody::interval(1), ConcaveFunction::isotropic(1, 1, 1), 1, WeightedMeasure::gaussian(1), q);
  EXPECT_TRUE(r.holds());
}

TEST(Lift, UnsupportedBeta) {
  try {
    lift_check(SymmetricBody::interval(1), ConcaveFunction::constant(1, 1), 4, WeightedMeasure::lebesgue(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedBeta);
  }
}
