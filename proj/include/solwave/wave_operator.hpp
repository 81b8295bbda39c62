/**
 * @file wave_operator.hpp
 * @brief Reduced boundary operator for solitary waves with constant vorticity.
 *
 * Unknowns are the differences from the laminar flow,
 *     w1 = eta - y,   w2 = zeta - (1 - gamma) y,
 * both harmonic in the strip and zero on the bed. The kinematic condition
 *     w2 + gamma w1 + gamma w1^2 / 2 = 0        on y = 1
 * is solved exactly for w2, which leaves the squared dynamic condition
 *     (gamma (w1 + w1y + w1 w1y) + w2y + 1)^2 - (1 - 2 alpha w1)(w1x^2 + (w1y + 1)^2) = 0
 * as the single residual, collocated on the oversampled grid.
 */
#pragma once

#include "solwave/strip_harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace solwave {

struct Parameters {
  double gamma = 0.0;
  /// 1 / F^2.
  double alpha = 1.0;

  double alpha_cr() const { return 1.0 - gamma; }
  double froude() const { return 1.0 / std::sqrt(alpha); }
};

struct ReducedState {
  SurfaceTrace w1;
  Parameters params;
  ModeBasis basis;

  static ReducedState trivial(const ModeBasis& basis, Parameters params) {
    return {SurfaceTrace::zero(basis), params, basis};
  }
};

/// Trace of w2 on y = 1 from the kinematic condition, projected to N+1 modes.
inline SurfaceTrace eliminate_w2(const SurfaceTrace& w1, double gamma, const ModeBasis& basis) {
  const Vector v = synthesize(w1, basis);
  const Vector w2 = -gamma * (v.array() + 0.5 * v.array().square()).matrix();
  return project(w2, basis);
}

/// First derivatives of w1 and w2 on y = 1 at a set of abscissae.
struct SurfaceFields {
  Vector x, w1, w1x, w1y, w2y;

  Eigen::Index size() const { return x.size(); }
};

namespace detail {

inline SurfaceFields nodal_fields(const ReducedState& s, const SurfaceTrace& w2) {
  const ModeBasis& b = s.basis;
  SurfaceFields f;
  f.x = b.nodes();
  f.w1 = synthesize(s.w1, b);
  f.w1x = synthesize(trace_x_derivative(s.w1, b), b);
  f.w1y = synthesize(dtn_apply(s.w1, b), b);
  f.w2y = synthesize(dtn_apply(w2, b), b);
  return f;
}

inline double alternating_sum(const Vector& c) {
  double s = 0.0;
  for (Eigen::Index n = 0; n < c.size(); ++n) s += (n % 2 == 0 ? 1.0 : -1.0) * c[n];
  return s;
}

}  // namespace detail

/// Surface fields at the collocation nodes.
inline SurfaceFields collocation_fields(const ReducedState& s) {
  return detail::nodal_fields(s, eliminate_w2(s.w1, s.params.gamma, s.basis));
}

/// Surface fields at the collocation nodes plus the crest x = 0 and the cell edge x = L.
inline SurfaceFields surface_samples(const ReducedState& s) {
  const ModeBasis& b = s.basis;
  const SurfaceTrace w2 = eliminate_w2(s.w1, s.params.gamma, b);
  const SurfaceFields nodal = detail::nodal_fields(s, w2);
  const Eigen::Index m = nodal.size();
  SurfaceFields f;
  auto grow = [m](const Vector& v, double first, double last) {
    Vector out(m + 2);
    out[0] = first;
    out.segment(1, m) = v;
    out[m + 1] = last;
    return out;
  };
  const Vector w1y = dtn_apply(s.w1, b).coeffs;
  const Vector w2y = dtn_apply(w2, b).coeffs;
  f.x = grow(nodal.x, 0.0, b.half_period());
  f.w1 = grow(nodal.w1, s.w1.coeffs.sum(), detail::alternating_sum(s.w1.coeffs));
  f.w1x = grow(nodal.w1x, 0.0, 0.0);
  f.w1y = grow(nodal.w1y, w1y.sum(), detail::alternating_sum(w1y));
  f.w2y = grow(nodal.w2y, w2y.sum(), detail::alternating_sum(w2y));
  return f;
}

namespace detail {

/// gamma (w1 + w1y + w1 w1y) + w2y + 1, which is psi_y on the surface.
inline Vector bernoulli_head(const SurfaceFields& f, double gamma) {
  return (gamma * (f.w1.array() + f.w1y.array() + f.w1.array() * f.w1y.array()) +
          f.w2y.array() + 1.0)
      .matrix();
}

inline Vector grad_eta_sq(const SurfaceFields& f) {
  return (f.w1x.array().square() + (1.0 + f.w1y.array()).square()).matrix();
}

}  // namespace detail

/// Nodal values of the dynamic condition on the collocation grid (length M).
inline Vector residual(const ReducedState& s) {
  const SurfaceFields f = collocation_fields(s);
  const double alpha = s.params.alpha;
  const Vector head = detail::bernoulli_head(f, s.params.gamma);
  const Vector grad2 = detail::grad_eta_sq(f);
  return (head.array().square() - (1.0 - 2.0 * alpha * f.w1.array()) * grad2.array()).matrix();
}

/// Residual projected onto the retained modes (length N+1); Newton drives this to zero.
inline Vector projected_residual(const ReducedState& s) {
  return s.basis.projector() * residual(s);
}

/**
 * Coefficients of the linearized boundary operator
 *     F1_w wdot = c1 wdot1 + c2 wdot2,
 *     F2_w wdot = a_ij d_i wdot_j + b_i wdot_i,
 * at a set of surface points.
 */
struct LinearCoefficients {
  Vector a11, a12, a21, a22, b1, b2, c1, c2;
};

inline LinearCoefficients linear_coefficients(const SurfaceFields& f, const Parameters& p) {
  const auto n = f.size();
  const double g = p.gamma;
  const double alpha = p.alpha;
  const Eigen::ArrayXd head = detail::bernoulli_head(f, g).array();
  const Eigen::ArrayXd grad2 = detail::grad_eta_sq(f).array();
  const Eigen::ArrayXd stretch = 1.0 - 2.0 * alpha * f.w1.array();

  LinearCoefficients c;
  c.a11 = (-2.0 * stretch * f.w1x.array()).matrix();
  c.a12 = (2.0 * g * head * (1.0 + f.w1.array()) - 2.0 * stretch * (1.0 + f.w1y.array())).matrix();
  c.a21 = Vector::Zero(n);
  c.a22 = (2.0 * head).matrix();
  c.b1 = (2.0 * g * (1.0 + f.w1y.array()) * head + 2.0 * alpha * grad2).matrix();
  c.b2 = Vector::Zero(n);
  c.c1 = (g * (1.0 + f.w1.array())).matrix();
  c.c2 = Vector::Ones(n);
  return c;
}

struct Jacobian {
  /// d(residual)/d(coeffs), M x (N+1).
  Matrix nodal;
  /// d(residual)/d(alpha), length M.
  Vector d_alpha;
  /// Projected onto the retained modes: (N+1) x (N+1) and N+1.
  Matrix projected;
  Vector projected_d_alpha;
};

/**
 * Analytic Jacobian of `residual` with respect to the w1 coefficients and alpha.
 *
 * The eliminated unknown enters through wdot2 = -c1 wdot1 (pointwise on the
 * grid, then projected), so the a22 column block is a22 * DtN * P * diag(-c1).
 */
inline Jacobian jacobian(const ReducedState& s) {
  const ModeBasis& b = s.basis;
  const SurfaceFields f = collocation_fields(s);
  const LinearCoefficients c = linear_coefficients(f, s.params);
  const Matrix& C = b.cos_table();
  const Matrix& S = b.sin_table();
  const Matrix& P = b.projector();
  const Vector& k = b.wavenumbers();
  const Vector& sigma = b.symbols();

  // d/dx and d/dy of the mode shapes on y = 1
  const Matrix Dx = -(S * k.asDiagonal());
  const Matrix Dy = C * sigma.asDiagonal();

  // wdot2 trace coefficients per unit wdot1 coefficient
  const Matrix w2_map = -(P * c.c1.asDiagonal() * C);

  Jacobian J;
  J.nodal = c.a11.asDiagonal() * Dx;
  J.nodal.noalias() += c.a12.asDiagonal() * Dy;
  J.nodal.noalias() += c.b1.asDiagonal() * C;
  J.nodal.noalias() += c.a22.asDiagonal() * (Dy * w2_map);

  J.d_alpha = (2.0 * f.w1.array() * detail::grad_eta_sq(f).array()).matrix();
  J.projected = P * J.nodal;
  J.projected_d_alpha = P * J.d_alpha;
  return J;
}

namespace detail {

/// V(q) = (1/M) sum_j v_j cos(k_q x_j) and W(q) likewise with sin, for q = 0..M.
inline void grid_transforms(const Vector& v, Vector& V, Vector& W) {
  const Eigen::Index M = v.size();
  const long long period = 4LL * M;
  Vector c(period), s(period);
  for (long long p = 0; p < period; ++p) {
    const double phase = std::numbers::pi * static_cast<double>(p) / (2.0 * M);
    c[p] = std::cos(phase);
    s[p] = std::sin(phase);
  }
  V.setZero(M + 1);
  W.setZero(M + 1);
  for (Eigen::Index q = 0; q <= M; ++q) {
    double vc = 0.0, vs = 0.0;
    long long p = q % period;
    const long long stride = (2 * q) % period;
    for (Eigen::Index j = 0; j < M; ++j) {
      vc += v[j] * c[p];
      vs += v[j] * s[p];
      p += stride;
      if (p >= period) p -= period;
    }
    V[q] = vc / M;
    W[q] = vs / M;
  }
}

/// P diag(v) C and P diag(v) S from the grid transforms of v.
inline void product_matrices(const Vector& v, int N, Matrix& Tc, Matrix& Ts) {
  Vector V, W;
  grid_transforms(v, V, W);
  auto Wodd = [&W](Eigen::Index q) { return q < 0 ? -W[-q] : W[q]; };
  Tc.resize(N + 1, N + 1);
  Ts.resize(N + 1, N + 1);
  for (int n = 0; n <= N; ++n) {
    for (int m = 0; m <= N; ++m) {
      const double cm = m == 0 ? 0.5 : 1.0;
      Tc(m, n) = cm * (V[std::abs(m - n)] + V[m + n]);
      Ts(m, n) = cm * (W[m + n] + Wodd(n - m));
    }
  }
}

}  // namespace detail

struct ProjectedJacobian {
  Matrix matrix;
  Vector d_alpha;
};

/**
 * The projected blocks of `jacobian` assembled from grid transforms of the
 * coefficient fields instead of dense products; needs M = 2N nodes.
 */
inline ProjectedJacobian projected_jacobian(const ReducedState& s) {
  const ModeBasis& b = s.basis;
  if (b.node_count() != 2 * b.mode_count()) {
    const Jacobian J = jacobian(s);
    return {J.projected, J.projected_d_alpha};
  }
  const int N = b.mode_count();
  const SurfaceFields f = collocation_fields(s);
  const LinearCoefficients c = linear_coefficients(f, s.params);
  const Vector& k = b.wavenumbers();
  const Vector& sigma = b.symbols();

  Matrix Tc, Ts, unused;
  ProjectedJacobian out;
  detail::product_matrices(c.a11, N, unused, Ts);
  out.matrix = -(Ts * k.asDiagonal());
  detail::product_matrices(c.a12, N, Tc, unused);
  out.matrix.noalias() += Tc * sigma.asDiagonal();
  detail::product_matrices(c.b1, N, Tc, unused);
  out.matrix += Tc;
  Matrix Tc1;
  detail::product_matrices(c.c1, N, Tc1, unused);
  detail::product_matrices(c.a22, N, Tc, unused);
  out.matrix.noalias() -= (Tc * sigma.asDiagonal()) * Tc1;

  const Vector d_alpha = (2.0 * f.w1.array() * detail::grad_eta_sq(f).array()).matrix();
  out.d_alpha = b.projector() * d_alpha;
  return out;
}

/// inf over the surface of 4 (1 - 2 alpha w1)^2 (w1x^2 + (1 + w1y)^2).
inline double lopatinskii_constant(const ReducedState& s) {
  const SurfaceFields f = surface_samples(s);
  const Eigen::ArrayXd stretch = 1.0 - 2.0 * s.params.alpha * f.w1.array();
  return (4.0 * stretch.square() * detail::grad_eta_sq(f).array()).minCoeff();
}

/// Same quantity sampled on an interior grid of `rows` levels y in (0, 1).
inline double lopatinskii_interior_sample(const ReducedState& s, int rows = 8, int columns = 64) {
  double inf = std::numeric_limits<double>::infinity();
  const double L = s.basis.half_period();
  for (int i = 1; i <= rows; ++i) {
    const double y = static_cast<double>(i) / (rows + 1);
    for (int j = 0; j <= columns; ++j) {
      const double x = L * j / columns;
      const double w1 = evaluate_interior(s.w1, s.basis, x, y);
      const Gradient g = evaluate_gradient_interior(s.w1, s.basis, x, y);
      const double stretch = 1.0 - 2.0 * s.params.alpha * w1;
      inf = std::min(inf, 4.0 * stretch * stretch * (g.dx * g.dx + (1.0 + g.dy) * (1.0 + g.dy)));
    }
  }
  return inf;
}

struct ComplementingCheck {
  double max_abs = 0.0;
  double max_rel = 0.0;
  double minor_at_crest = 0.0;
  double lopatinskii_at_crest = 0.0;
};

/**
 * Compares the complementing-condition minor
 *     (c1 a21 - c2 a11)^2 + (c1 a22 - c2 a12)^2
 * built from the linearization coefficients with the closed form
 *     4 (1 - 2 alpha w1)^2 (w1x^2 + (1 + w1y)^2)
 * pointwise on the surface.
 */
inline ComplementingCheck complementing_identity(const ReducedState& s) {
  const SurfaceFields f = surface_samples(s);
  const LinearCoefficients c = linear_coefficients(f, s.params);
  const Eigen::ArrayXd minor =
      (c.c1.array() * c.a21.array() - c.c2.array() * c.a11.array()).square() +
      (c.c1.array() * c.a22.array() - c.c2.array() * c.a12.array()).square();
  const Eigen::ArrayXd stretch = 1.0 - 2.0 * s.params.alpha * f.w1.array();
  const Eigen::ArrayXd closed =
      4.0 * stretch.square() * (f.w1x.array().square() + (1.0 + f.w1y.array()).square());
  const Eigen::ArrayXd diff = (minor - closed).abs();
  ComplementingCheck out;
  out.max_abs = diff.maxCoeff();
  out.max_rel = (diff / closed.abs().max(std::numeric_limits<double>::min())).maxCoeff();
  out.minor_at_crest = minor[0];
  out.lopatinskii_at_crest = closed[0];
  return out;
}

/// Blow-up monitors along a branch.
struct Monitor {
  /// inf over the surface of 1 - 2 alpha w1; zero means a stagnation point at the crest.
  double m1 = 1.0;
  /// inf over the surface of |grad eta|^2.
  double m2 = 1.0;
  /// 1 / F = sqrt(alpha).
  double m3 = 1.0;
  double froude = 1.0;
  /// sup over the surface of |grad w1|; replaces m1 for positive vorticity.
  double grad_sup = 0.0;
};

inline Monitor monitor(const ReducedState& s) {
  const SurfaceFields f = surface_samples(s);
  Monitor m;
  m.m1 = (1.0 - 2.0 * s.params.alpha * f.w1.array()).minCoeff();
  m.m2 = detail::grad_eta_sq(f).minCoeff();
  m.m3 = std::sqrt(s.params.alpha);
  m.froude = s.params.froude();
  m.grad_sup = (f.w1x.array().square() + f.w1y.array().square()).sqrt().maxCoeff();
  return m;
}

/// Smallest value of a22 on the surface; the squared dynamic condition is tracked on a22 > 0.
inline double min_a22(const ReducedState& s) {
  const SurfaceFields f = surface_samples(s);
  return 2.0 * detail::bernoulli_head(f, s.params.gamma).minCoeff();
}

}  // namespace solwave
