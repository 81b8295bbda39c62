#include "solwave/asymptotics.hpp"
#include "solwave/continuation.hpp"
#include "solwave/newton.hpp"
#include "solwave/nodal.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace solwave;

namespace {

NewtonResult converged(double gamma, double eps, int N = 256, double L = 64.0) {
  ModeBasis b(L, N);
  const Parameters p{gamma, 1.0 - gamma - eps};
  return newton_solve({seed_profile(gamma, eps, b), p, b}, NewtonSettings{});
}

BranchConfig short_run(int steps) {
  BranchConfig cfg;
  cfg.gamma = -1.0;
  cfg.eps0 = 0.02;
  cfg.continuation.max_steps = steps;
  cfg.continuation.h0 = 0.05;
  cfg.continuation.max_modes = 256;
  cfg.diagnostics.stagnation = false;
  return cfg;
}

}  // namespace

TEST(Newton, TrivialStateNeedsNoIterations) {
  ModeBasis b(16.0, 32);
  const NewtonResult r = newton_solve(ReducedState::trivial(b, {-1.0, 1.7}), NewtonSettings{});
  EXPECT_LE(r.iterations, 1);
  EXPECT_EQ(r.state.w1.coeffs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Newton, SeedConvergesToSmallAmplitudeWave) {
  const double eps = 0.04;
  const NewtonResult r = converged(-1.0, eps);
  EXPECT_LE(r.iterations, 6);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_NEAR(r.state.w1.crest(), 3.0 * eps / 7.0, 0.05 * 3.0 * eps / 7.0);
}

TEST(Newton, SupercriticalAttemptGivesNoElevationWave) {
  const double eps = 0.04;
  ModeBasis b(64.0, 256);
  const Parameters p{-1.0, 2.0 + eps};
  bool nontrivial_elevation = false;
  try {
    const NewtonResult r = newton_solve({seed_profile(-1.0, eps, b), p, b}, NewtonSettings{});
    const Vector w = synthesize(r.state.w1, b);
    nontrivial_elevation = w.cwiseAbs().maxCoeff() > 1e-8 && w.minCoeff() >= -1e-8;
  } catch (const SolverError&) {
  }
  EXPECT_FALSE(nontrivial_elevation);
}

TEST(Newton, SingularSystemIsReported) {
  Matrix A = Matrix::Identity(3, 3);
  A(2, 2) = 0.0;
  try {
    detail::solve_checked(A, Vector::Ones(3));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::SingularJacobian);
  }
}

TEST(Newton, IterationCapIsDivergence) {
  ModeBasis b(64.0, 128);
  NewtonSettings s;
  s.max_iter = 1;
  try {
    newton_solve({seed_profile(-1.0, 0.04, b), {-1.0, 1.96}, b}, s);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::NewtonDivergence);
  }
  s.max_iter = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Predictor, FirstStepLowersAlpha) {
  const NewtonResult r = converged(-1.0, 0.02, 128);
  const BranchPoint bp{r.state, 0.0, r.iterations, r.residual, {}};
  const Prediction p = arclength_step(bp, nullptr, 0.05);
  EXPECT_LT(p.tangent_alpha, 0.0);
  EXPECT_LT(p.state.params.alpha, r.state.params.alpha);
  EXPECT_NEAR(detail::weighted_norm(p.tangent_coeffs, p.tangent_alpha, 10.0), 1.0, 1e-14);
}

TEST(Predictor, SecantThroughTrivialPointsStaysTrivial) {
  ModeBasis b(16.0, 16);
  const BranchPoint a{ReducedState::trivial(b, {-1.0, 1.5}), 0.0, 0, 0.0, {}};
  const BranchPoint c{ReducedState::trivial(b, {-1.0, 1.4}), 1.0, 0, 0.0, {}};
  const Prediction p = arclength_step(c, &a, 0.3);
  EXPECT_EQ(p.state.w1.coeffs.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(p.state.params.alpha, 1.4 - 0.3 / 10.0, 1e-15);
}

TEST(Nodal, TrivialIsFlat) {
  ModeBasis b(8.0, 16);
  const NodalCheck n = nodal_check(ReducedState::trivial(b, {0.0, 0.5}));
  EXPECT_TRUE(n.holds);
  EXPECT_TRUE(n.trivial_flat);
}

TEST(Nodal, SmallWaveIsStrictlyMonotone) {
  const NodalCheck n = nodal_check(converged(-1.0, 0.05).state);
  EXPECT_TRUE(n.holds);
  EXPECT_FALSE(n.trivial_flat);
  EXPECT_LT(n.worst, 0.0);
}

TEST(Nodal, TwoBumpTraceFails) {
  ModeBasis b(8.0, 16);
  ReducedState s = ReducedState::trivial(b, {0.0, 0.5});
  s.w1.coeffs[1] = 1.0;
  s.w1.coeffs[2] = 2.0;
  const NodalCheck n = nodal_check(s);
  EXPECT_FALSE(n.holds);
  EXPECT_GT(n.worst, 1e-3);
  // eta_x = -k (sin kx + 4 sin 2kx) is positive for kx in (arccos(-1/8), pi)
  EXPECT_GT(n.worst_x, 8.0 * std::acos(-1.0 / 8.0) / std::numbers::pi);
}

TEST(Branch, ZeroStepsKeepsSeedOnly) {
  const Branch br = run_branch(short_run(0));
  ASSERT_EQ(br.points.size(), 1u);
  EXPECT_EQ(br.reason.kind, TerminationReason::Kind::MaxSteps);
  EXPECT_TRUE(br.attempts.empty());
}

TEST(Branch, AcceptedPointsSatisfyInvariants) {
  const BranchConfig cfg = short_run(6);
  const Branch br = run_branch(cfg);
  ASSERT_EQ(br.points.size(), 7u);
  double prev_crest = 0.0, prev_s = -1.0;
  for (std::size_t i = 0; i < br.points.size(); ++i) {
    const BranchPoint& p = br.points[i];
    EXPECT_LE(p.residual, cfg.newton.tol_residual);
    EXPECT_LT(p.state.params.alpha, p.state.params.alpha_cr());
    EXPECT_GT(p.diagnostics.lopatinskii, 0.0);
    EXPECT_TRUE(p.diagnostics.nodal);
    EXPECT_GE(synthesize(p.state.w1, p.state.basis).minCoeff(), -1e-8);
    EXPECT_GT(p.state.w1.crest(), prev_crest);
    EXPECT_GT(p.s, prev_s);
    prev_crest = p.state.w1.crest();
    prev_s = p.s;
  }
}

TEST(Branch, RunsAreDeterministic) {
  const Branch a = run_branch(short_run(3));
  const Branch b = run_branch(short_run(3));
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].state.params.alpha, b.points[i].state.params.alpha);
    EXPECT_TRUE(a.points[i].state.w1.coeffs == b.points[i].state.w1.coeffs);
  }
}

TEST(Branch, StepIsHalvedAfterNewtonFailure) {
  BranchConfig cfg = short_run(2);
  cfg.newton.max_iter = 2;
  cfg.continuation.h0 = 0.5;
  cfg.continuation.h_max = 0.5;
  const Branch br = run_branch(cfg);
  bool seen = false;
  for (std::size_t i = 0; i + 1 < br.attempts.size(); ++i) {
    if (br.attempts[i].outcome == "NewtonDivergence") {
      seen = true;
      EXPECT_DOUBLE_EQ(br.attempts[i + 1].h, 0.5 * br.attempts[i].h);
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Branch, MonitorThresholdStopsTheRun) {
  BranchConfig cfg = short_run(50);
  // the seed already has m1 < 0.99
  cfg.continuation.thresholds.m_min = 0.99;
  const Branch br = run_branch(cfg);
  EXPECT_EQ(br.points.size(), 1u);
  EXPECT_EQ(br.reason.label(), "MonitorBlowup(m1)");
}

TEST(Config, Validation) {
  BranchConfig cfg;
  cfg.eps0 = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.continuation.h_min = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
