#include "solwave/asymptotics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace solwave;

namespace {

// plain bisection on k cosh k - target sinh k, written without the library helpers
double bisection_root(double target) {
  auto f = [target](double k) { return k * std::cosh(k) - target * std::sinh(k); };
  double lo = 1e-6, hi = target;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Seed, CoefficientAndCrest) {
  EXPECT_DOUBLE_EQ(nonlinear_coefficient(-1.0), 7.0);
  EXPECT_DOUBLE_EQ(nonlinear_coefficient(0.0), 3.0);
  EXPECT_GT(nonlinear_coefficient(1.5), 0.0);
  ModeBasis b(64.0, 128);
  const SurfaceTrace t = seed_profile(-1.0, 0.04, b);
  EXPECT_NEAR(t.crest(), 3.0 * 0.04 / 7.0, 1e-10);
  EXPECT_THROW(seed_profile(-1.0, 0.0, b), std::invalid_argument);
}

TEST(Sech2, StableForLargeArguments) {
  EXPECT_DOUBLE_EQ(sech2(0.0), 1.0);
  EXPECT_NEAR(sech2(1.0), 1.0 / (std::cosh(1.0) * std::cosh(1.0)), 1e-15);
  EXPECT_EQ(sech2(1e3), 0.0);
}

TEST(Dispersion, NoRootBelowCritical) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> g(-3.0, 1.0), frac(0.01, 0.99);
  for (int i = 0; i < 20; ++i) {
    const double gamma = g(rng);
    // gamma + alpha < 1 with alpha > 0 when gamma < 1
    const double alpha = (1.0 - gamma) * frac(rng);
    const DispersionRoot r = dispersion_root(gamma, alpha);
    EXPECT_FALSE(r.k.has_value()) << gamma << " " << alpha;
    EXPECT_FALSE(r.boundary);
  }
}

TEST(Dispersion, RootAgreesWithBisectionOracle) {
  for (double gamma : {-1.0, 0.0, 0.3}) {
    const DispersionRoot r = dispersion_root(gamma, 1.2 - gamma);
    ASSERT_TRUE(r.k.has_value());
    EXPECT_LE(std::abs(*r.k / std::tanh(*r.k) - 1.2), 1e-12);
    EXPECT_NEAR(*r.k, bisection_root(1.2), 1e-10);
  }
  const DispersionRoot far = dispersion_root(0.0, 7.5);
  ASSERT_TRUE(far.k.has_value());
  EXPECT_NEAR(*far.k, bisection_root(7.5), 1e-10);
}

TEST(Dispersion, DocumentedValues) {
  EXPECT_FALSE(dispersion_root(0.0, 0.9).k.has_value());
  const DispersionRoot r = dispersion_root(0.0, 1.2);
  ASSERT_TRUE(r.k.has_value());
  // 30-digit reference root
  EXPECT_NEAR(*r.k, 0.790283592486904858, 1e-12);
}

TEST(Dispersion, BoundaryCase) {
  const DispersionRoot r = dispersion_root(-1.0, 2.0);
  EXPECT_TRUE(r.boundary);
  EXPECT_FALSE(r.k.has_value());
}

TEST(ReducedOde, ExplicitHomoclinicSolvesTruncatedEquation) {
  // eighth-order central second difference
  const double gamma = -1.0, h = 0.02;
  const double c[] = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  for (double X : {-4.0, -1.3, 0.0, 0.4, 2.2, 6.0}) {
    double d2 = 0.0;
    for (int i = -4; i <= 4; ++i) d2 += c[i + 4] * explicit_homoclinic(gamma, X + i * h);
    d2 /= h * h;
    const double Q = explicit_homoclinic(gamma, X);
    const double rhs = reduced_ode_rhs({Q, 0.0, X}, gamma).dP;
    EXPECT_NEAR(d2, rhs, 1e-10) << X;
    // slope against a fourth-order first difference
    const double d1 = (explicit_homoclinic(gamma, X - 2 * h) - 8 * explicit_homoclinic(gamma, X - h) +
                       8 * explicit_homoclinic(gamma, X + h) - explicit_homoclinic(gamma, X + 2 * h)) /
                      (12 * h);
    EXPECT_NEAR(explicit_homoclinic_slope(gamma, X), d1, 1e-7);
    EXPECT_NEAR(reduced_ode_energy({Q, explicit_homoclinic_slope(gamma, X), X}, gamma), 0.0, 1e-14);
  }
  EXPECT_DOUBLE_EQ(homoclinic_peak(-1.0), 3.0 / 7.0);
}

TEST(ReducedOde, Rk4FollowsHomoclinicThroughPeak) {
  const double gamma = -1.0;
  const double X0 = -10.0;
  const ReducedOdeState start{explicit_homoclinic(gamma, X0), explicit_homoclinic_slope(gamma, X0), X0};
  const auto path = integrate_reduced_ode(start, gamma, 20.0, 1e-3);
  double closest = 1e300;
  for (const auto& s : path) closest = std::min(closest, std::hypot(s.Q - 3.0 / 7.0, s.P));
  EXPECT_LE(closest, 1e-4);
  EXPECT_NEAR(path.back().X, 10.0, 1e-12);
  EXPECT_THROW(integrate_reduced_ode(start, gamma, 1.0, 0.0), std::invalid_argument);
}

TEST(ReducedOde, OriginStaysPutAndEnergyIsConserved) {
  for (const auto& s : integrate_reduced_ode({0.0, 0.0, 0.0}, 0.0, 5.0, 0.1)) {
    EXPECT_EQ(s.Q, 0.0);
    EXPECT_EQ(s.P, 0.0);
  }
  const ReducedOdeState start{0.2, 0.1, 0.0};
  const double e0 = reduced_ode_energy(start, -1.0);
  double drift_coarse = 0.0, drift_fine = 0.0;
  for (const auto& s : integrate_reduced_ode(start, -1.0, 2.0, 0.02))
    drift_coarse = std::max(drift_coarse, std::abs(reduced_ode_energy(s, -1.0) - e0));
  for (const auto& s : integrate_reduced_ode(start, -1.0, 2.0, 0.01))
    drift_fine = std::max(drift_fine, std::abs(reduced_ode_energy(s, -1.0) - e0));
  EXPECT_LT(drift_coarse, 1e-7);
  // fourth order: halving the step cuts the drift by about 16
  EXPECT_GT(drift_coarse / drift_fine, 10.0);
}

TEST(ReducedOde, OriginIsHyperbolic) {
  for (double gamma : {-1.0, 0.0, 0.5}) {
    const auto ev = origin_eigenvalues(gamma);
    EXPECT_NEAR(ev[0].real(), -std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(ev[1].real(), std::sqrt(3.0), 1e-12);
    EXPECT_EQ(ev[0].imag(), 0.0);
  }
}
