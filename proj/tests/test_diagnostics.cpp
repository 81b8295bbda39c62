#include "solwave/asymptotics.hpp"
#include "solwave/conjugate_flows.hpp"
#include "solwave/diagnostics.hpp"
#include "solwave/newton.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace solwave;

namespace {

ReducedState converged(double gamma, double eps, int N = 256) {
  ModeBasis b(64.0, N);
  return newton_solve({seed_profile(gamma, eps, b), {gamma, 1.0 - gamma - eps}, b}, NewtonSettings{}).state;
}

const ReducedState& wave_m1() {
  static const ReducedState s = converged(-1.0, 0.05);
  return s;
}

const ReducedState& wave_0() {
  static const ReducedState s = converged(0.0, 0.05);
  return s;
}

// closed form of the laminar flow force at unit depth
double laminar_flow_force(double g, double a) { return 1.0 - g + g * g / 3.0 + a / 2.0; }

}  // namespace

TEST(FlowForce, LaminarValue) {
  ModeBasis b(8.0, 8);
  const ReducedState t = ReducedState::trivial(b, {0.0, 0.5});
  EXPECT_NEAR(flow_force(t, 3.0), 1.25, 1e-12);
  EXPECT_NEAR(shat(1.0, t.params), 1.25, 1e-12);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> g(-2.0, 0.9), f(0.05, 0.95);
  for (int i = 0; i < 10; ++i) {
    const double gamma = g(rng), alpha = (1.0 - gamma) * f(rng);
    const ReducedState s = ReducedState::trivial(b, {gamma, alpha});
    EXPECT_NEAR(flow_force(s, 1.0), laminar_flow_force(gamma, alpha), 1e-12);
    EXPECT_NEAR(shat(1.0, s.params), laminar_flow_force(gamma, alpha), 1e-12);
  }
}

TEST(FlowForce, ConstantAcrossStationsOnSolutions) {
  for (const ReducedState* s : {&wave_m1(), &wave_0()}) {
    const FlowForce ff = flow_force_profile(*s, default_stations(s->basis));
    ASSERT_EQ(ff.values.size(), 9u);
    EXPECT_LE(ff.spread, 1e-8 * std::abs(ff.mean));
    // the tail station sits in the laminar far field
    EXPECT_NEAR(ff.values.back(), shat(1.0, s->params), 1e-10);
  }
}

TEST(FlowForce, DegenerateMapIsRejected) {
  ModeBasis b(8.0, 8);
  ReducedState s = ReducedState::trivial(b, {0.0, 0.5});
  s.w1.coeffs[0] = -1.0;  // eta = y + w1 = 0
  EXPECT_THROW(flow_force(s, 1.0), std::domain_error);
  EXPECT_THROW(velocity(s, 1.0, 0.5), std::domain_error);
}

TEST(Conjugate, LaminarBernoulliConstantIsOne) {
  for (double g : {-2.0, -1.0, 0.0, 0.5})
    for (double a : {0.1, 0.7, 1.9}) EXPECT_NEAR(qhat(1.0, {g, a}), 1.0, 1e-15);
}

TEST(Conjugate, IrrotationalRootHasClosedForm) {
  const ConjugateDepth c = conjugate_depth({0.0, 0.3});
  ASSERT_TRUE(c.d.has_value());
  EXPECT_NEAR(*c.d, (1.0 + std::sqrt(3.4)) / 1.2, 1e-12);
  EXPECT_NEAR(*c.d, 2.369924076215481, 1e-12);
}

TEST(Conjugate, FlowForceDerivativeIdentity) {
  // five-point stencil: the two-point rule's h^2 error alone reaches 3e-8 near d = 0.2
  const double h = 1e-5;
  for (double g : {-1.0, 0.0, 0.5})
    for (double a : {0.2, 0.45}) {
      const Parameters p{g, a};
      for (double d = 0.2; d <= 5.0 + 1e-12; d += 0.05) {
        const double fd =
            (shat(d - 2 * h, p) - 8 * shat(d - h, p) + 8 * shat(d + h, p) - shat(d + 2 * h, p)) / (12 * h);
        EXPECT_NEAR(fd, 0.5 * (qhat(1.0, p) - qhat(d, p)), 1e-8) << g << " " << a << " " << d;
      }
    }
}

TEST(Conjugate, ConvexityAndCriticalDepth) {
  const Parameters p{-1.0, 0.5};
  const double dcr = d_critical(p);
  EXPECT_NEAR(qhat_derivative(dcr, p), 0.0, 1e-12);
  for (double d = 0.2; d <= 5.0; d += 0.1) {
    EXPECT_GT(qhat_second_derivative(d, p), 0.0);
    const double fd = (qhat(d + 1e-4, p) - 2.0 * qhat(d, p) + qhat(d - 1e-4, p)) / 1e-8;
    EXPECT_NEAR(fd, qhat_second_derivative(d, p), 1e-4 * qhat_second_derivative(d, p));
  }
  // alpha < alpha_cr puts the critical depth above 1
  EXPECT_GT(dcr, 1.0);
  EXPECT_THROW(d_critical({0.0, 0.0}), std::invalid_argument);
}

TEST(Conjugate, SubcriticalStreamCarriesMoreFlowForce) {
  for (double g : {-1.0, 0.0, 0.5}) {
    const double acr = 1.0 - g;
    for (double f : {0.1, 0.4, 0.8, 0.99}) {
      const Parameters p{g, acr * f};
      const ConjugateDepth c = conjugate_depth(p);
      ASSERT_TRUE(c.d.has_value());
      EXPECT_GT(*c.d, 1.0);
      EXPECT_NEAR(qhat(*c.d, p), 1.0, 1e-12);
      EXPECT_GT(shat(*c.d, p), shat(1.0, p));
    }
  }
}

TEST(Conjugate, NoBore) {
  // no d != 1 shares both Q and S with the unit-depth stream
  for (double g : {-1.0, 0.0, 0.5})
    for (double f : {0.2, 0.6, 0.95}) {
      const Parameters p{g, (1.0 - g) * f};
      for (double d = 0.2; d <= 5.0; d += 1e-3) {
        if (std::abs(d - 1.0) < 1e-2) continue;
        const bool both = std::abs(qhat(d, p) - 1.0) <= 1e-8 && std::abs(shat(d, p) - shat(1.0, p)) <= 1e-8;
        EXPECT_FALSE(both) << d;
      }
    }
}

TEST(Conjugate, DegenerateAtCritical) {
  const ConjugateDepth c = conjugate_depth({-1.0, 2.0});
  EXPECT_TRUE(c.degenerate);
  EXPECT_FALSE(c.d.has_value());
}

TEST(Phi, TrivialBothSidesVanish) {
  ModeBasis b(8.0, 8);
  const PhiCheck c = phi_surface_check(ReducedState::trivial(b, {-1.0, 1.2}));
  for (std::size_t i = 0; i < c.phi.size(); ++i) {
    EXPECT_NEAR(c.phi[i], 0.0, 1e-14);
    EXPECT_EQ(c.rhs[i], 0.0);
  }
}

TEST(Phi, HoldsOnSolutions) {
  for (const ReducedState* s : {&wave_m1(), &wave_0()}) {
    const PhiCheck c = phi_surface_check(*s);
    EXPECT_LE(c.max_rel, 1e-7);
    // crest station carries the largest elevation
    EXPECT_GT(c.rhs.front(), 0.0);
  }
}

TEST(IntegralIdentity, TrivialAndConverged) {
  ModeBasis b(8.0, 8);
  const IntegralIdentity t = integral_identity_check(ReducedState::trivial(b, {-1.0, 1.2}));
  EXPECT_EQ(t.lhs, 0.0);
  EXPECT_EQ(t.rhs, 0.0);
  for (const ReducedState* s : {&wave_m1(), &wave_0()}) {
    const IntegralIdentity c = integral_identity_check(*s);
    EXPECT_LE(c.residual, 1e-6);
    EXPECT_GT(c.int_w1, 0.0);
    EXPECT_GT(c.int_w1_w1y, 0.0);
    EXPECT_GT(c.int_w1_sq, 0.0);
    EXPECT_GT(c.int_w1_cube, 0.0);
  }
}

TEST(Velocity, LaminarProfile) {
  ModeBasis b(8.0, 8);
  for (double g : {-1.0, 0.0, 0.7}) {
    const ReducedState t = ReducedState::trivial(b, {g, 0.3});
    for (double y : {0.0, 0.4, 1.0}) {
      const Velocity v = velocity(t, 2.0, y);
      EXPECT_NEAR(v.u, (1.0 - g) + g * y, 1e-14);
      EXPECT_EQ(v.v, 0.0);
    }
  }
}

TEST(Velocity, OddVerticalComponentAndSurfaceConditions) {
  const ReducedState& s = wave_m1();
  for (double y : {0.1, 0.5, 1.0}) EXPECT_NEAR(velocity(s, 0.0, y).v, 0.0, 1e-15);
  EXPECT_GT(std::abs(velocity(s, 2.0, 0.8).v), 1e-4);
  const SurfaceVelocityCheck c = surface_velocity_check(s);
  EXPECT_LE(c.dynamic, 1e-9);
  EXPECT_LE(c.kinematic, 1e-9);
}

TEST(Stagnation, LaminarProfiles) {
  ModeBasis b(8.0, 8);
  const StagnationReport a = stagnation_scan(ReducedState::trivial(b, {-2.0, 0.5}));
  EXPECT_TRUE(a.points.empty());
  EXPECT_TRUE(a.critical_layers.empty());
  EXPECT_NEAR(a.min_speed2, 1.0, 1e-14);

  const StagnationReport c = stagnation_scan(ReducedState::trivial(b, {-0.5, 0.5}));
  EXPECT_TRUE(c.points.empty());
  EXPECT_NEAR(c.min_speed2, 1.0, 1e-14);

  // u = -0.5 + 1.5 y changes sign at y = 1/3 in every column
  ScanGrid grid;
  grid.nx = 17;
  const StagnationReport d = stagnation_scan(ReducedState::trivial(b, {1.5, 0.5}), grid);
  ASSERT_EQ(d.critical_layers.size(), 17u);
  for (const auto& cl : d.critical_layers) EXPECT_NEAR(cl.y, 1.0 / 3.0, 1e-14);
}

TEST(Stagnation, CrestSpeedFromBernoulli) {
  ModeBasis b(8.0, 16);
  ReducedState s = ReducedState::trivial(b, {0.0, 0.6});
  s.w1.coeffs[1] = 0.8;
  EXPECT_NEAR(stagnation_scan(s).crest_speed2, 1.0 - 2.0 * 0.6 * 0.8, 1e-14);
  EXPECT_THROW(stagnation_scan(s, {1, 5, 1e-4}), std::invalid_argument);
}

TEST(Surface, TrivialIsFlat) {
  ModeBasis b(8.0, 8);
  const PhysicalSurface p = reconstruct_surface(ReducedState::trivial(b, {0.0, 0.5}), 9);
  for (const auto& pt : p.points) {
    EXPECT_NEAR(pt.X, pt.x, 1e-15);
    EXPECT_EQ(pt.Y, 1.0);
  }
  EXPECT_FALSE(p.overhang);
}

TEST(Surface, SmallWaveHasNoOverhang) {
  const PhysicalSurface p = reconstruct_surface(wave_m1());
  EXPECT_FALSE(p.overhang);
  EXPECT_EQ(p.points.front().X, 0.0);
  EXPECT_NEAR(p.points.front().Y, 1.0 + wave_m1().w1.crest(), 1e-14);
  for (std::size_t i = 1; i < p.points.size(); ++i) EXPECT_GT(p.points[i].X, p.points[i - 1].X);
}

TEST(Surface, ConjugateSatisfiesCauchyRiemann) {
  ModeBasis b(8.0, 16);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ux(0.0, 8.0), uy(0.1, 0.9);
  SurfaceTrace t = SurfaceTrace::zero(b);
  for (int n = 0; n < b.size(); ++n) t.coeffs[n] = 0.1 * u(rng) * std::exp(-0.4 * n);
  const double h = 2e-3;
  auto xi = [&](double x, double y) { return evaluate_conjugate(t, b, x, y); };
  for (int i = 0; i < 10; ++i) {
    const double x = ux(rng), y = uy(rng);
    const double xi_x = (xi(x - 2 * h, y) - 8 * xi(x - h, y) + 8 * xi(x + h, y) - xi(x + 2 * h, y)) / (12 * h);
    const double xi_y = (xi(x, y - 2 * h) - 8 * xi(x, y - h) + 8 * xi(x, y + h) - xi(x, y + 2 * h)) / (12 * h);
    const Gradient g = evaluate_gradient_interior(t, b, x, y);
    EXPECT_LE(std::abs(xi_x - (1.0 + g.dy)) + std::abs(xi_y + g.dx), 1e-10);
  }
}

TEST(PsiBound, LaminarCases) {
  ModeBasis b(8.0, 8);
  const PsiBound a = psi_bound_check(ReducedState::trivial(b, {-1.0, 1.0}));
  EXPECT_TRUE(a.ok);
  EXPECT_NEAR(a.psi_y_max, 1.0, 1e-15);
  EXPECT_NEAR(a.upper, 1.5, 1e-15);
  const PsiBound c = psi_bound_check(ReducedState::trivial(b, {0.5, 0.3}));
  EXPECT_TRUE(c.ok);
  EXPECT_NEAR(c.lower, 0.5, 1e-15);
}

TEST(PsiBound, HoldsOnSolutions) {
  EXPECT_TRUE(psi_bound_check(wave_m1()).ok);
  const PsiBound z = psi_bound_check(wave_0());
  EXPECT_TRUE(z.ok);
  EXPECT_NEAR(z.psi_y_max, 1.0, 1e-12);
}

TEST(Report, AggregatesSmallWave) {
  const DiagnosticsReport r = diagnose(wave_m1());
  EXPECT_LE(r.flow_force_spread, 1e-8 * std::abs(r.flow_force));
  EXPECT_LE(r.phi_identity_residual, 1e-7);
  EXPECT_LE(r.integral_identity_residual, 1e-6);
  EXPECT_LE(r.complementing_residual, 1e-10);
  EXPECT_GT(r.lopatinskii, 0.0);
  EXPECT_TRUE(r.nodal);
  EXPECT_TRUE(r.nodal_strict);
  EXPECT_FALSE(r.overhang);
  EXPECT_TRUE(r.stagnation_points.empty());
  EXPECT_EQ(r.critical_layer_crossings, 0u);
  EXPECT_TRUE(r.psi_bound_ok);
}
