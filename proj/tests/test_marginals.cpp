#include <gtest/gtest.h>

#include <cmath>

#include <bmlab/checks.hpp>

using namespace bmlab;

namespace {

MarginalProblem disc_problem() {
  return {ConvexDomainFamily::disc_sections(), JointFunction::radial_poly(1, {2, 0, -1, -1, 0, 0}),
          WeightedMeasure::lebesgue(1), 1.0, std::nullopt, {}};
}

Field zero_field(int n) { return Polynomial::constant(n, 0.0).field(); }

}  // namespace

// --- marginals

TEST(Marginals, HomotheticIntervalsClosedForm) {
  // Omega_t = [-(2-t), 2-t], Phi = 2 - x^2/2, beta = 1: F = 4a - a^3/3
  MarginalProblem p{ConvexDomainFamily::minkowski(SymmetricBody::interval(1), SymmetricBody::interval(2)),
                    JointFunction::frozen(ConcaveFunction::isotropic(1, 2.0, 0.5)), WeightedMeasure::lebesgue(1), 1.0,
                    std::nullopt, {}};
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    double a = 2 - t;
    EXPECT_NEAR(phi_eval(p, t), std::sqrt(4 * a - a * a * a / 3), 1e-12) << t;
  }
}

TEST(Marginals, ConstantFamilyHasZeroSecondDifferences) {
  auto k = SymmetricBody::box({1.0, 0.6});
  MarginalProblem p{ConvexDomainFamily::minkowski(k, k), JointFunction::frozen(ConcaveFunction::isotropic(2, 1.5, 0.3)),
                    WeightedMeasure::gaussian(2), 2.0, std::nullopt, {}};
  auto r = concavity_report(p, uniform_grid(0, 1, 11));
  for (std::size_t i = 1; i + 1 < r.t.size(); ++i) EXPECT_NEAR(r.d2[i], 0.0, 1e-9);
  EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Marginals, MinkowskiProfileIsConcave) {
  MarginalProblem p{ConvexDomainFamily::minkowski(SymmetricBody::box({1.0, 0.5}), SymmetricBody::ball(2, 0.8)),
                    JointFunction::frozen(ConcaveFunction::isotropic(2, 2.0, 0.5)), WeightedMeasure::gaussian(2), 2.0,
                    std::nullopt, {}};
  auto r = concavity_report(p, uniform_grid(0, 1, 11));
  EXPECT_EQ(r.verdict, Verdict::Holds);
  EXPECT_LT(r.max_d2, 0.0);
}

TEST(Marginals, ProfileJsonRoundTrip) {
  auto r = concavity_report(disc_problem(), uniform_grid(-0.8, 0.8, 9));
  json j = to_json(r);
  EXPECT_EQ(to_json(profile_report_from_json(j)).dump(), j.dump());
}

TEST(Marginals, FdSecondOnKnownFunction) {
  auto fd = fd_second([](double t) { return std::sin(t); }, 0.7, 1e-2);
  EXPECT_NEAR(fd.d2, -std::sin(0.7), 1e-9);
}

TEST(Marginals, BProfileOfGaussianInterval) {
  auto grid = uniform_grid(-1, 1, 9);
  auto r = b_profile_check(SymmetricBody::interval(1), WeightedMeasure::gaussian(1), grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_NEAR(r.value[i], std::log(std::erf(std::exp(grid[i]) / std::sqrt(2.0))), 1e-10);
  EXPECT_EQ(r.verdict, Verdict::Holds);
}

TEST(Marginals, LogMarginalOfSeparablePotential) {
  // V = a t^2/2 + |x|^2/2: log alpha(t) = -a t^2/2 + const
  for (int n : {1, 2}) {
    JointPotential::Coupled c;
    c.a = 0.7;
    c.q = Mat::Identity(n, n);
    auto v = JointPotential::coupled(n, c);
    auto r = log_marginal_alpha(v, WeightedMeasure::gaussian(n), uniform_grid(-1, 1, 9));
    EXPECT_NEAR(r.min_d2, -0.7, 1e-8);
    EXPECT_NEAR(r.max_d2, -0.7, 1e-8);
    EXPECT_EQ(r.verdict, Verdict::Holds);
  }
}

// --- second variation

TEST(Variation, DiscOracle) {
  auto p = disc_problem();
  // F(t) = 2r(2 - t^2) - 2r^3/3, r = sqrt(1 - t^2): F(0) = 10/3, F''(0) = -6
  double F0 = 10.0 / 3.0;
  EXPECT_NEAR(phi_eval(p, 0.0), std::sqrt(F0), 1e-12);
  auto sv = second_variation(p, 0.0);
  EXPECT_NEAR(sv.value, -9.0 / 5.0, 1e-8);
  EXPECT_NEAR(sv.phi_dd, -6.0 / (2 * std::sqrt(F0)), 1e-8);
  auto fd = fd_second([&](double t) { return phi_eval(p, t); }, 0.0, 1e-2);
  EXPECT_NEAR(sv.phi_dd, fd.d2, 1e-4);
}

TEST(Variation, FormulaMatchesFiniteDifferences) {
  struct C {
    int n;
    RadialPoly ph;
    WeightedMeasure mu;
    double beta;
    RadiusProfile prof;
    double t;
  };
  std::vector<C> cs = {
      {1, {3, 0.4, -1, -0.5, -0.2, 0.3}, WeightedMeasure::gaussian(1), 2.0, {RadiusProfile::Quadric, 1.2, 0.3, 1}, 0.2},
      {2, {3, 0.4, -1, -0.5, -0.2, 0.3}, WeightedMeasure::gaussian(2), 1.5, {RadiusProfile::Affine, 1.0, -0.4, 0}, 0.3},
      {2, {2, -0.3, -0.5, -0.3, 0, 0.1}, WeightedMeasure{2, RadialWeight::power(4)}, 1.0,
       {RadiusProfile::Quadric, 1, 0.5, 0.8}, -0.2},
      {2, {2, -0.3, -0.5, -0.3, 0, 0.1}, WeightedMeasure{2, RadialWeight::heavy_tail(2, 4)}, 3.0,
       {RadiusProfile::Quadric, 1, 0.5, 0.8}, 0.1},
  };
  for (const auto& c : cs) {
    MarginalProblem p{ConvexDomainFamily::profile(c.n, -0.9, 0.9, c.prof), JointFunction::radial_poly(c.n, c.ph), c.mu,
                      c.beta, std::nullopt, {}};
    auto sv = second_variation(p, c.t);
    auto fd = fd_second([&](double s) { return phi_eval(p, s); }, c.t, 1e-2);
    EXPECT_NEAR(p.exponent() * sv.phi * sv.value, fd.d2, 1e-4 * (1 + std::abs(fd.d2)));
  }
}

TEST(Variation, LevelSetDeltaOnDisc) {
  // Phi = 2 - t^2 - x^2 on the disc section at t = 1/2: delta = 2r = sqrt(3)
  auto p = disc_problem();
  auto kin = boundary_kinematics(p.family, 0.5);
  auto d = level_set_delta(p.phi, kin, 0.5, make_vec({kin.r}));
  EXPECT_NEAR(d.delta, std::sqrt(3.0), 1e-12);
}

TEST(Variation, NonBallSectionsHaveNoKinematics) {
  auto fam = ConvexDomainFamily::minkowski(SymmetricBody::box({1, 1}), SymmetricBody::ball(2, 1));
  try {
    boundary_kinematics(fam, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingKinematics);
  }
}

TEST(Variation, NeumannIntervalAndRadial) {
  NeumannProblem np;
  np.r0 = 1;
  np.f = [](double x) { return x; };
  auto s = solve_neumann(np);
  double e = 0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    double x = s.x[i];
    e = std::max(e, std::abs(s.u[i] - (x * x * x / 6 - x / 2)));
  }
  EXPECT_LT(e, 1e-9);

  NeumannProblem rp;
  rp.geometry = NeumannGeometry::Radial;
  rp.n = 2;
  rp.f = [](double) { return 4.0; };
  rp.psi_hi = 2;
  auto r = solve_neumann(rp);
  e = 0;
  for (std::size_t i = 0; i < r.x.size(); ++i) e = std::max(e, std::abs(r.u[i] - r.x[i] * r.x[i]));
  EXPECT_LT(e, 1e-9);

  rp.psi_hi = 1;  // int f != int psi
  try {
    solve_neumann(rp);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::IncompatibleData);
  }
}

TEST(Variation, BochnerReillyPolynomials) {
  Polynomial p2(2, {{1, {3, 0, 0}}, {-2, {1, 2, 0}}, {0.5, {2, 1, 0}}, {0.3, {0, 4, 0}}, {1, {1, 1, 0}}});
  Polynomial p1(1, {{0.4, {4, 0, 0}}, {-1, {3, 0, 0}}, {0.7, {1, 0, 0}}});
  for (auto [u, n] : {std::pair{p1, 1}, {p2, 2}}) {
    for (const auto& v : {zero_field(n), Polynomial::half_norm2(n).field()}) {
      auto b = bochner_residual(v, n, 1.3, u.field());
      EXPECT_LE(std::abs(b.residual), 1e-8 * b.scale);
    }
  }
}

TEST(Variation, HereditaryAndSpectralOracles) {
  auto g1 = WeightedMeasure::gaussian(1);
  auto u = Polynomial::half_norm2(1).field();
  // nu = gamma_1, u = x^2/2: E[u''^2 + u'^2] = 2, E[L u] = E[1 - x^2] = 0
  auto h = hereditary_margin(g1, {std::nullopt, EvenConvexPotential::zero(1)}, u);
  EXPECT_NEAR(h.margin, 2.0, 1e-8);
  EXPECT_NEAR(h.details.at("denominator"), 0.0, 1e-10);
  // spectral: E[|D^2 v|^2] - E[w'(r)/r |grad v|^2] = 1 - E[x^2]
  auto s0 = spectral_margin(g1, {std::nullopt, EvenConvexPotential::zero(1)}, u);
  EXPECT_NEAR(s0.margin, 0.0, 1e-8);
  // nu proportional to e^{-x^2} gamma_1 is N(0, 1/3)
  auto s1 = spectral_margin(g1, {std::nullopt, EvenConvexPotential(1, {{1.0, Mat::Identity(1, 1)}}, {})}, u);
  EXPECT_NEAR(s1.margin, 2.0 / 3.0, 1e-8);
}

TEST(Marginals, ProblemConfigValidation) {
  EXPECT_THROW(problem_from_json(json::parse(R"({"family":{"type":"disc"},"beta":-1})")), Error);
  EXPECT_THROW(problem_from_json(json::parse(R"({"family":{"type":"disc"},"bogus":1})")), Error);
  auto p = problem_from_json(json::parse(R"({"family":{"type":"disc"},"beta":2})"));
  EXPECT_DOUBLE_EQ(p.exponent(), 1.0 / 3.0);
}
