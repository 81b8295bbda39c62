/**
 * @file continuation.hpp
 * @brief Pseudo-arclength continuation of the solitary-wave branch from the
 *        small-amplitude seed, with step control and blow-up monitors.
 */
#pragma once

#include "solwave/asymptotics.hpp"
#include "solwave/diagnostics.hpp"
#include "solwave/newton.hpp"
#include "solwave/nodal.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace solwave {

struct MonitorThresholds {
  /// m1 and m2 below this end the branch
  double m_min = 1e-2;
  double alpha_min = 1e-3;
  double froude_max = 1e3;
  /// sup |grad w1| above this ends a positive-vorticity branch
  double grad_max = 1e2;

  void validate() const {
    if (!(m_min > 0.0) || !(alpha_min > 0.0) || !(froude_max > 0.0) || !(grad_max > 0.0))
      throw std::invalid_argument("MonitorThresholds: thresholds must be positive");
  }
};

struct ContinuationSettings {
  double h0 = 0.05;
  double h_min = 1e-8;
  double h_max = 0.08;
  int max_steps = 400;
  double grow = 1.5;
  /// steps needing more corrector iterations than this do not grow h
  int fast_iterations = 4;
  /// sup-norm change of the trace between accepted points must stay below continuity * h
  double continuity = 10.0;
  double alpha_weight = 10.0;
  /// largest mode count reached by doubling
  int max_modes = 2048;
  /// relative size of the top quarter of the spectrum that triggers doubling
  double tail_tol = 1e-13;
  MonitorThresholds thresholds;

  void validate() const {
    if (!(h_min > 0.0) || !(h0 >= h_min) || !(h_max >= h0))
      throw std::invalid_argument("ContinuationSettings: need 0 < h_min <= h0 <= h_max");
    if (max_steps < 0) throw std::invalid_argument("ContinuationSettings: max_steps must be non-negative");
    if (!(grow >= 1.0)) throw std::invalid_argument("ContinuationSettings: grow must be at least 1");
    if (!(continuity > 0.0) || !(alpha_weight > 0.0) || !(tail_tol > 0.0))
      throw std::invalid_argument("ContinuationSettings: continuity, alpha_weight and tail_tol must be positive");
    if (max_modes < 1) throw std::invalid_argument("ContinuationSettings: max_modes must be positive");
    thresholds.validate();
  }
};

struct BranchConfig {
  double gamma = -1.0;
  double eps0 = 0.01;
  double half_period = 64.0;
  int modes = 128;
  NewtonSettings newton;
  ContinuationSettings continuation;
  DiagnosticsSettings diagnostics;

  void validate() const {
    if (!std::isfinite(gamma)) throw std::invalid_argument("BranchConfig: gamma must be finite");
    if (!(eps0 > 0.0)) throw std::invalid_argument("BranchConfig: eps0 must be positive");
    if (!(half_period > 0.0)) throw std::invalid_argument("BranchConfig: half_period must be positive");
    if (modes < 1) throw std::invalid_argument("BranchConfig: modes must be positive");
    if (!(1.0 - gamma - eps0 > 0.0)) throw std::invalid_argument("BranchConfig: seed alpha must be positive");
    newton.validate();
    continuation.validate();
  }
};

struct BranchPoint {
  ReducedState state;
  double s = 0.0;
  int newton_iters = 0;
  double residual = 0.0;
  DiagnosticsReport diagnostics;
};

struct TerminationReason {
  enum class Kind { MonitorBlowup, StepCollapse, MaxSteps, NewtonDivergence, SignFlip };
  enum class Which { None, M1, M2, M3, Gradient };
  Kind kind = Kind::MaxSteps;
  Which monitor = Which::None;
  std::string detail;

  std::string label() const {
    switch (kind) {
      case Kind::MonitorBlowup:
        switch (monitor) {
          case Which::M1: return "MonitorBlowup(m1)";
          case Which::M2: return "MonitorBlowup(m2)";
          case Which::M3: return "MonitorBlowup(m3)";
          case Which::Gradient: return "MonitorBlowup(grad)";
          case Which::None: break;
        }
        return "MonitorBlowup";
      case Kind::StepCollapse: return "StepCollapse";
      case Kind::MaxSteps: return "MaxSteps";
      case Kind::NewtonDivergence: return "NewtonDivergence";
      case Kind::SignFlip: return "SignFlip";
    }
    return "?";
  }
};

/// One corrector attempt, accepted or not.
struct StepAttempt {
  int step = 0;
  double h = 0.0;
  bool accepted = false;
  std::string outcome;
  int modes = 0;
};

struct Branch {
  std::vector<BranchPoint> points;
  TerminationReason reason;
  std::vector<StepAttempt> attempts;
};

struct Prediction {
  ReducedState state;
  Vector tangent_coeffs;
  double tangent_alpha = 0.0;
};

namespace detail {

inline double weighted_norm(const Vector& a, double alpha, double w) {
  return std::sqrt(a.squaredNorm() + w * w * alpha * alpha);
}

/// Tangent of the solution curve at `s`, oriented so that alpha decreases.
inline std::pair<Vector, double> initial_tangent(const ReducedState& s, double w) {
  const ProjectedJacobian J = projected_jacobian(s);
  Vector ta = solve_checked(J.matrix, -J.d_alpha);
  double talpha = 1.0;
  const double n = weighted_norm(ta, talpha, w);
  ta /= -n;
  talpha /= -n;
  return {ta, talpha};
}

}  // namespace detail

/**
 * Secant predictor through `previous` and `current` (tangent when there is no
 * previous point), normalized in the weighted norm and scaled by h.
 */
inline Prediction arclength_step(const BranchPoint& current, const BranchPoint* previous, double h,
                                 double alpha_weight = 10.0) {
  const ReducedState& c = current.state;
  Vector ta;
  double talpha = 0.0;
  bool have = false;
  if (previous && previous->state.basis.same_as(c.basis)) {
    ta = c.w1.coeffs - previous->state.w1.coeffs;
    talpha = c.params.alpha - previous->state.params.alpha;
    const double n = detail::weighted_norm(ta, talpha, alpha_weight);
    if (n > 0.0) {
      ta /= n;
      talpha /= n;
      have = true;
    }
  }
  if (!have) std::tie(ta, talpha) = detail::initial_tangent(c, alpha_weight);

  Prediction p{c, ta, talpha};
  p.state.w1.coeffs += h * ta;
  p.state.params.alpha += h * talpha;
  return p;
}

namespace detail {

inline double top_quarter_ratio(const SurfaceTrace& t) {
  const Eigen::Index n = t.size();
  const double peak = t.coeffs.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  const Eigen::Index start = (3 * n) / 4;
  return t.coeffs.tail(n - start).cwiseAbs().maxCoeff() / peak;
}

inline ReducedState refine_state(const ReducedState& s, const ModeBasis& fine) {
  return {resample(s.w1, s.basis, fine), s.params, fine};
}

inline std::optional<TerminationReason> monitor_blowup(const Monitor& m, double gamma,
                                                       const MonitorThresholds& t) {
  using W = TerminationReason::Which;
  auto hit = [](W w, std::string d) {
    return TerminationReason{TerminationReason::Kind::MonitorBlowup, w, std::move(d)};
  };
  if (gamma <= 0.0 && m.m1 < t.m_min) return hit(W::M1, "m1 = " + std::to_string(m.m1));
  if (gamma > 0.0 && m.grad_sup > t.grad_max) return hit(W::Gradient, "sup|grad w1| = " + std::to_string(m.grad_sup));
  if (m.m2 < t.m_min) return hit(W::M2, "m2 = " + std::to_string(m.m2));
  if (m.m3 * m.m3 < t.alpha_min || m.froude > t.froude_max)
    return hit(W::M3, "alpha = " + std::to_string(m.m3 * m.m3) + ", F = " + std::to_string(m.froude));
  return std::nullopt;
}

/// Reasons a corrected point may not join the branch; empty when admissible.
inline std::string rejection(const ReducedState& s, const NodalCheck& nodal) {
  if (!(s.params.alpha < s.params.alpha_cr())) return "alpha >= alpha_cr";
  if (!(lopatinskii_constant(s) > 0.0)) return "lopatinskii constant not positive";
  const SurfaceFields f = surface_samples(s);
  if (f.w1.minCoeff() < -1e-8) return "not a wave of elevation";
  if (!nodal.holds) return "nodal property fails at x = " + std::to_string(nodal.worst_x);
  return {};
}

}  // namespace detail

/**
 * Seeds at alpha = alpha_cr - eps0, corrects, then continues by pseudo-arclength
 * until a monitor crosses its threshold, the step collapses or max_steps is reached.
 * The mode count doubles (up to max_modes) when the top quarter of the spectrum
 * or the nodal check shows under-resolution.
 */
inline Branch run_branch(const BranchConfig& cfg) {
  cfg.validate();
  const ContinuationSettings& cs = cfg.continuation;
  using Kind = TerminationReason::Kind;

  ModeBasis basis(cfg.half_period, cfg.modes);
  const Parameters p0{cfg.gamma, 1.0 - cfg.gamma - cfg.eps0};

  auto needs_refinement = [&](const ReducedState& s, const NodalCheck& nc) {
    return s.basis.mode_count() * 2 <= cs.max_modes &&
           (detail::top_quarter_ratio(s.w1) > cs.tail_tol || !nc.holds);
  };

  // seed, refined until resolved
  NewtonResult seed = newton_solve({seed_profile(cfg.gamma, cfg.eps0, basis), p0, basis}, cfg.newton);
  int seed_iters = seed.iterations;
  NodalCheck nc = nodal_check(seed.state);
  while (needs_refinement(seed.state, nc)) {
    basis = basis.refined(2);
    seed = newton_solve(detail::refine_state(seed.state, basis), cfg.newton);
    seed_iters += seed.iterations;
    nc = nodal_check(seed.state);
  }

  Branch br;
  br.points.push_back({seed.state, 0.0, seed_iters, seed.residual, diagnose(seed.state, cfg.diagnostics)});
  if (auto stop = detail::monitor_blowup(br.points.back().diagnostics.monitor, cfg.gamma, cs.thresholds)) {
    br.reason = *stop;
    return br;
  }

  double h = cs.h0;
  int step = 0;
  bool last_failure_newton = false;
  while (true) {
    if (step >= cs.max_steps) {
      br.reason = {Kind::MaxSteps, TerminationReason::Which::None, std::to_string(step) + " steps"};
      return br;
    }
    if (h < cs.h_min) {
      br.reason = {last_failure_newton ? Kind::NewtonDivergence : Kind::StepCollapse,
                   TerminationReason::Which::None, "h = " + std::to_string(h)};
      return br;
    }

    const BranchPoint& cur = br.points.back();
    const BranchPoint* prev = br.points.size() > 1 ? &br.points[br.points.size() - 2] : nullptr;
    StepAttempt attempt{step + 1, h, false, {}, cur.state.basis.mode_count()};

    const Prediction pred = arclength_step(cur, prev, h, cs.alpha_weight);
    const ArclengthConstraint con{pred.tangent_coeffs, pred.tangent_alpha, pred.state.w1.coeffs,
                                  pred.state.params.alpha, cs.alpha_weight};
    std::optional<NewtonResult> corrected;
    try {
      corrected = newton_solve(pred.state, cfg.newton, con);
    } catch (const SolverError& e) {
      if (e.kind() == SolverError::Kind::TrivialCollapse) throw;
      attempt.outcome = to_string(e.kind());
      br.attempts.push_back(attempt);
      last_failure_newton = true;
      h *= 0.5;
      continue;
    }
    const NewtonResult& res = *corrected;

    NodalCheck nodal = nodal_check(res.state);
    if (needs_refinement(res.state, nodal)) {
      // double the modes for the whole local history and retry the step
      const ModeBasis fine = cur.state.basis.refined(2);
      const std::size_t first = br.points.size() > 1 ? br.points.size() - 2 : br.points.size() - 1;
      try {
        std::vector<NewtonResult> lifted;
        for (std::size_t i = first; i < br.points.size(); ++i)
          lifted.push_back(newton_solve(detail::refine_state(br.points[i].state, fine), cfg.newton));
        for (std::size_t i = first; i < br.points.size(); ++i) {
          br.points[i].state = lifted[i - first].state;
          br.points[i].residual = lifted[i - first].residual;
        }
        attempt.outcome = "refined to N = " + std::to_string(fine.mode_count());
      } catch (const SolverError& e) {
        attempt.outcome = std::string("refinement failed: ") + to_string(e.kind());
        h *= 0.5;
      }
      br.attempts.push_back(attempt);
      continue;
    }

    if (min_a22(res.state) <= 0.0) {
      attempt.outcome = "SignFlip";
      br.attempts.push_back(attempt);
      br.reason = {Kind::SignFlip, TerminationReason::Which::None, "a22 changes sign on the surface"};
      return br;
    }

    if (!nodal.holds && detail::top_quarter_ratio(res.state.w1) > cs.tail_tol) {
      // sign error at the truncation level with no modes left to add; halving h cannot fix it
      attempt.outcome = "rejected: nodal property fails at the resolution limit";
      br.attempts.push_back(attempt);
      char where[96];
      std::snprintf(where, sizeof where, "eta_x = %.2e at (x, y) = (%.4g, %.3g)", nodal.worst, nodal.worst_x,
                    nodal.worst_y);
      br.reason = {Kind::StepCollapse, TerminationReason::Which::None,
                   "resolution limit: N = " + std::to_string(res.state.basis.mode_count()) + ", " + where};
      return br;
    }

    std::string why = detail::rejection(res.state, nodal);
    const Vector jump = synthesize(res.state.w1, res.state.basis) - synthesize(cur.state.w1, cur.state.basis);
    if (why.empty() && jump.lpNorm<Eigen::Infinity>() > cs.continuity * h) why = "continuity bound exceeded";
    if (!why.empty()) {
      attempt.outcome = "rejected: " + why;
      br.attempts.push_back(attempt);
      last_failure_newton = false;
      h *= 0.5;
      continue;
    }

    ++step;
    if (step > 5 && synthesize(res.state.w1, res.state.basis).lpNorm<Eigen::Infinity>() < 1e-8)
      throw SolverError(SolverError::Kind::TrivialCollapse,
                        "continuation returned to the trivial solution at step " + std::to_string(step));

    const double ds = detail::weighted_norm(res.state.w1.coeffs - cur.state.w1.coeffs,
                                            res.state.params.alpha - cur.state.params.alpha, cs.alpha_weight);
    BranchPoint next{res.state, cur.s + ds, res.iterations, res.residual, diagnose(res.state, cfg.diagnostics)};
    attempt.accepted = true;
    attempt.outcome = "accepted";
    br.attempts.push_back(attempt);
    br.points.push_back(std::move(next));
    last_failure_newton = false;

    if (auto stop = detail::monitor_blowup(br.points.back().diagnostics.monitor, cfg.gamma, cs.thresholds)) {
      br.reason = *stop;
      return br;
    }
    if (res.iterations <= cs.fast_iterations) h = std::min(h * cs.grow, cs.h_max);
  }
}

}  // namespace solwave
