#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "levinson2d/radial_solver.hpp"
#include "oracles.hpp"

using namespace levinson2d;
using std::numbers::pi;

namespace {

ProblemSpec make_spec(double V0, int twice_j, double lambda = 1.0, double M = 1.0, double r0 = 1.0) {
  ProblemSpec s;
  s.potential = PotentialModel::square_well(V0, r0);
  s.M = M;
  s.j = HalfInteger{twice_j};
  s.lambda = lambda;
  return s;
}

// Distance between two angles modulo pi.
double angle_gap(double a, double b) {
  const double d = std::remainder(a - b, pi);
  return std::abs(d);
}

}  // namespace

TEST(Energy, ThresholdPrecision) {
  const auto e = Energy::from_k(1e-9, 1.0, Side::plus);
  EXPECT_DOUBLE_EQ(e.e_minus_m, 0.5e-18);
  const auto b = Energy::from_kappa(1e-9, 1.0, Side::minus);
  EXPECT_DOUBLE_EQ(b.e_plus_m, 0.5e-18);
  EXPECT_TRUE(Energy::threshold(Side::plus, 2.0).at_threshold());
  const auto g = Energy::from_E(1.25, 1.0);
  EXPECT_DOUBLE_EQ(g.k, 0.75);
  EXPECT_EQ(g.kappa, 0.0);
}

TEST(SeriesStart, SmallComponentVanishesAtThreshold) {
  const auto spec = make_spec(0.0, 1, 0.0);
  const double r_s = 1e-6;
  const auto s = series_start(spec, Energy::threshold(Side::plus, 1.0), r_s);
  EXPECT_LE(std::abs(s.g() / s.f()), 10 * r_s);
}

TEST(SeriesStart, MatchesFreeFormsAtStartRadius) {
  for (int twice_j : {1, 3, 5}) {
    for (double E : {-0.9, 0.0, 0.7}) {
      const auto spec = make_spec(0.0, twice_j, 0.0);
      const double r_s = 1e-6;
      const auto en = Energy::from_E(E, 1.0);
      const auto s = series_start(spec, en, r_s);
      const auto exact = free_interior_ratio(HalfInteger{twice_j}, en, r_s, 1.0);
      EXPECT_NEAR(s.f() / s.g(), exact.value, 1e-8 * std::abs(exact.value));
    }
  }
}

TEST(SeriesStart, LeadingExponentIsJ) {
  for (int twice_j : {1, 3}) {
    const auto spec = make_spec(-2.0, twice_j);
    const auto en = Energy::from_E(0.3, 1.0);
    const double r_s = 1e-6;
    const auto start = series_start(spec, en, r_s);
    const auto states = trajectory(spec, en, start, {1e-5, 1e-4, 1e-3});
    const double slope =
        (std::log(std::abs(states[2].f())) - std::log(std::abs(states[0].f()))) / (std::log(1e-3) - std::log(1e-5));
    EXPECT_NEAR(slope, 0.5 * twice_j, 1e-4);
    // Near the origin the angle sits close to pi/2 (g/f -> 0).
    EXPECT_NEAR(start.theta, pi / 2, 1e-5);
  }
}

TEST(SeriesStart, RejectsFallToCentre) {
  ProblemSpec s;
  s.potential = PotentialModel::custom([](double r) { return -1.0 / std::pow(r, 1.5); });
  s.j = HalfInteger{1};
  try {
    (void)integrate_interior(s, Energy::from_E(0.0, 1.0));
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported_origin);
  }
}

TEST(SeriesStart, CoulombLikeWeakSingularityAccepted) {
  ProblemSpec s;
  s.potential = PotentialModel::custom([](double r) { return -0.3 / r; });
  s.j = HalfInteger{1};
  const auto a = integrate_interior(s, Energy::from_E(0.0, 1.0));
  EXPECT_TRUE(std::isfinite(a.theta));
}

TEST(IntegrateInterior, FreeMatchesClosedForm) {
  for (int twice_j : {1, 3, 5, 9}) {
    for (double E : {-0.999, -0.5, 0.0, 0.5, 0.99}) {
      for (double r0 : {0.5, 1.0, 3.0}) {
        const auto spec = make_spec(0.0, twice_j, 0.0, 1.0, r0);
        const auto en = Energy::from_E(E, 1.0);
        const auto num = integrate_interior(spec, en);
        const auto exact = free_interior_ratio(HalfInteger{twice_j}, en, r0, 1.0);
        EXPECT_NEAR(num.value, exact.value, 1e-8 * std::abs(exact.value)) << twice_j << " " << E << " " << r0;
      }
    }
  }
}

TEST(IntegrateInterior, FreeLimitAtMinusM) {
  const auto spec = make_spec(0.0, 1, 0.0, 1.3, 0.7);
  const auto a = integrate_interior(spec, Energy::threshold(Side::minus, 1.3));
  EXPECT_NEAR(a.value, -2.0 / (2 * 1.3 * 0.7), 1e-9);
}

TEST(IntegrateInterior, NormalizationInvariance) {
  const auto spec = make_spec(-3.0, 3);
  const auto en = Energy::from_E(0.2, 1.0);
  auto start = series_start(spec, en, 1e-6);
  const double a = trajectory(spec, en, start, {1.0}).front().theta;
  start.log_rho += 17.0;
  const double b = trajectory(spec, en, start, {1.0}).front().theta;
  EXPECT_EQ(a, b);
}

TEST(IntegrateInterior, MatchesRawComponentIntegration) {
  // Independent fixed-step RK4 on (f, g) in long double.
  const auto spec = make_spec(-4.0, 3);
  const auto en = Energy::from_E(0.4, 1.0);
  const auto start = series_start(spec, en, 1e-6);
  const auto fg = oracle::rk4_fg(1.5, 0.4, 1.0, [](double r) { return r < 1.0 ? -4.0 : 0.0; }, 1e-6, start.f(),
                                 start.g(), 1.0, 200000);
  EXPECT_LT(angle_gap(integrate_interior(spec, en).theta, std::atan2(fg.f, fg.g)), 1e-8);
}

TEST(IntegrateInterior, AngleDecreasesWithWellStrength) {
  // Deeper well (more negative V0) -> smaller theta at r0 for fixed E = M.
  double prev = 1e300;
  for (double depth = 0.0; depth <= 30.0; depth += 0.25) {
    const auto spec = make_spec(-depth, 1);
    const double theta = interior_angle(spec, Energy::threshold(Side::plus, 1.0), 1.0);
    EXPECT_LT(theta, prev) << depth;
    prev = theta;
  }
}

TEST(IntegrateInterior, WronskianIdentity) {
  const auto spec = make_spec(-6.0, 1);
  const auto e = Energy::from_E(0.1, 1.0);
  const auto e1 = Energy::from_E(0.35, 1.0);
  std::vector<double> radii;
  const int n = 6001;
  for (int i = 1; i <= n; ++i) radii.push_back(std::exp(std::log(1e-6) + (std::log(1.0) - std::log(1e-6)) * i / n));
  const auto a = trajectory(spec, e, series_start(spec, e, 1e-6), radii);
  const auto b = trajectory(spec, e1, series_start(spec, e1, 1e-6), radii);
  // Simpson in t = ln r of r (f1 f + g1 g); the grid is uniform in t.
  const double dt = std::log(radii[1]) - std::log(radii[0]);
  const auto y = [&](int i) { return radii[i] * (a[i].f() * b[i].f() + a[i].g() * b[i].g()); };
  double integral = 0.0;
  for (int i = 0; i + 2 < n; i += 2) integral += dt / 3.0 * (y(i) + 4.0 * y(i + 1) + y(i + 2));
  // Below radii[0] the integrand ~ r^(2j+1) contributes a negligible sliver.
  integral += y(0) * dt / (1.0 + 2.0 * 0.5 + 1.0);
  const double lhs = b.back().f() * a.back().g() - b.back().g() * a.back().f();
  const double rhs = -(0.35 - 0.1) * integral;
  EXPECT_NEAR(lhs, rhs, 1e-6 * std::abs(rhs));
}

TEST(FreeInteriorRatio, LimitingBranches) {
  const double M = 1.0, r0 = 1.0;
  for (int twice_j : {1, 3, 5}) {
    const double j = 0.5 * twice_j;
    const auto near_minus = Energy::from_kappa(1e-4, M, Side::minus);
    EXPECT_NEAR(free_interior_ratio(HalfInteger{twice_j}, near_minus, r0, M).value, -(2 * j + 1) / (2 * M * r0), 1e-6);
    const auto near_plus = Energy::from_kappa(1e-4, M, Side::plus);
    const double expected = -2 * M * (2 * j + 1) / (1e-8 * r0);
    EXPECT_NEAR(free_interior_ratio(HalfInteger{twice_j}, near_plus, r0, M).value, expected, 1e-6 * std::abs(expected));
    const auto pole = free_interior_ratio(HalfInteger{twice_j}, Energy::threshold(Side::plus, M), r0, M);
    EXPECT_TRUE(pole.is_pole());
    EXPECT_EQ(pole.theta, pi / 2);
  }
}

TEST(ExteriorBoundRatio, LimitingBranches) {
  const double M = 1.0, r0 = 1.0, x = 1e-4;
  for (int twice_j : {3, 5, 7}) {
    const double j = 0.5 * twice_j;
    const auto near_plus = Energy::from_kappa(x / r0, M, Side::plus);
    EXPECT_NEAR(exterior_bound_ratio(HalfInteger{twice_j}, near_plus, r0, M).value, 2 * M * r0 / (2 * j - 1), 1e-6);
    const auto near_minus = Energy::from_kappa(x / r0, M, Side::minus);
    const double small = x * x / r0 * r0 / (2 * M * (2 * j - 1));
    EXPECT_NEAR(exterior_bound_ratio(HalfInteger{twice_j}, near_minus, r0, M).value, small, 1e-4 * small);
  }
  // j = 1/2: log behaviour; the next term is (ln 2 - gamma) relative to -ln(kappa r0).
  const auto near_plus = Energy::from_kappa(1e-12, M, Side::plus);
  const double lead = -2 * M * r0 * std::log(1e-12);
  const double next = 2 * M * r0 * (std::log(2.0) - std::numbers::egamma);
  EXPECT_NEAR(exterior_bound_ratio(HalfInteger{1}, near_plus, r0, M).value, lead + next, 1e-6 * lead);
  EXPECT_TRUE(exterior_bound_ratio(HalfInteger{1}, Energy::threshold(Side::plus, M), r0, M).is_pole());
  EXPECT_EQ(exterior_bound_ratio(HalfInteger{1}, Energy::threshold(Side::minus, M), r0, M).value, 0.0);
}

TEST(ExteriorBoundRatio, IncreasesWithEnergy) {
  for (int twice_j : {1, 3, 5}) {
    double prev = -1.0;
    for (int i = 0; i <= 400; ++i) {
      const double E = -1.0 + 2.0 * i / 400.0;
      const double theta = exterior_bound_ratio(HalfInteger{twice_j}, Energy::from_E(E, 1.0), 1.0, 1.0).theta;
      EXPECT_GT(theta, prev) << twice_j << " " << E;
      prev = theta;
    }
  }
}

TEST(ExteriorPowerRatio, ReducesToCutoffAtZeroTail) {
  for (int twice_j : {1, 3, 5}) {
    for (double E : {-0.99, -0.4, 0.0, 0.4, 0.99}) {
      const auto en = Energy::from_E(E, 1.0);
      const auto a = exterior_power_ratio(HalfInteger{twice_j}, en, 1.7, 1.0, 0.0);
      const auto b = exterior_bound_ratio(HalfInteger{twice_j}, en, 1.7, 1.0);
      EXPECT_NEAR(a.value, b.value, 1e-12 * std::max(1.0, std::abs(b.value)));
    }
  }
}

TEST(ExteriorPowerRatio, ThresholdValuesMatchTailRatio) {
  for (int twice_j : {3, 5}) {
    for (double b : {-0.4, 0.3, 1.0}) {
      const HalfInteger j{twice_j};
      const auto plus = exterior_power_ratio(j, Energy::threshold(Side::plus, 1.0), 2.0, 1.0, b);
      EXPECT_NEAR(plus.value, exterior_tail_ratio(j, Side::plus, 2.0, 1.0, b).value, 1e-12);
      const auto minus = exterior_power_ratio(j, Energy::threshold(Side::minus, 1.0), 2.0, 1.0, b);
      EXPECT_NEAR(minus.value, exterior_tail_ratio(j, Side::minus, 2.0, 1.0, b).value, 1e-12);
    }
  }
}

TEST(ExteriorTailRatio, ZeroTailContinuity) {
  const double M = 1.0, r0 = 1.0;
  for (int twice_j : {3, 5}) {
    const double j = 0.5 * twice_j;
    EXPECT_NEAR(exterior_tail_ratio(HalfInteger{twice_j}, Side::plus, r0, M, 1e-12).value, 2 * M * r0 / (2 * j - 1), 1e-10);
    EXPECT_NEAR(exterior_tail_ratio(HalfInteger{twice_j}, Side::minus, r0, M, 1e-12).value, 0.0, 1e-10);
  }
}

TEST(ExteriorTailRatio, HalfJArithmetic) {
  // j = 1/2: alpha^2 = 2Mb. 2Mb = 1 gives alpha = 1 and the ratio 2 M r0; 2Mb = 3/4 gives alpha = sqrt(3)/2.
  const double M = 1.0, r0 = 1.3;
  EXPECT_NEAR(exterior_tail_ratio(HalfInteger{1}, Side::plus, r0, M, 0.5).value, 2 * M * r0, 1e-14);
  EXPECT_NEAR(exterior_tail_ratio(HalfInteger{1}, Side::plus, r0, M, 0.375).value, 2 * M * r0 / (std::sqrt(3.0) / 2),
              1e-14);
}

TEST(ExteriorTailRatio, RejectsInfiniteSpectrum) {
  try {
    (void)exterior_tail_ratio(HalfInteger{1}, Side::plus, 1.0, 1.0, -0.2);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported_regime);
  }
}

TEST(MatchRatio, PoleRepresentation) {
  const auto m = MatchRatio::from_components(1.0, 0.0);
  EXPECT_TRUE(m.is_pole());
  EXPECT_EQ(m.theta, pi / 2);
  const auto n = MatchRatio::from_components(-2.0, 1.0);
  EXPECT_NEAR(std::tan(n.theta), -2.0, 1e-15);
  EXPECT_GE(n.theta, 0.0);
  EXPECT_LT(n.theta, pi);
}
