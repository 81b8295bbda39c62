/**
 * @file asymptotics.hpp
 * @brief Small-amplitude theory: sech^2 seed, dispersion relation, reduced ODE.
 *
 * Near alpha_cr = 1 - gamma, write alpha = alpha_cr - eps. The surface trace
 * of w1 is then, to leading order,
 *     3 eps / (gamma^2 - 3 gamma + 3) * sech^2(sqrt(3 eps) x / 2),
 * the homoclinic orbit of the scaled reduced equation
 *     Q'' = 3 Q - (3/2)(gamma^2 - 3 gamma + 3) Q^2,    x = X / sqrt(eps), q = eps Q.
 */
#pragma once

#include "solwave/strip_harmonics.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace solwave {

/// gamma^2 - 3 gamma + 3; strictly positive for every real gamma.
inline double nonlinear_coefficient(double gamma) { return gamma * gamma - 3.0 * gamma + 3.0; }

/// sech^2 without overflow for large arguments.
inline double sech2(double z) {
  const double e = std::exp(-2.0 * std::abs(z));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

/// Leading-order solitary profile at alpha = alpha_cr - eps, evaluated at x.
inline double seed_value(double gamma, double eps, double x) {
  return 3.0 * eps / nonlinear_coefficient(gamma) * sech2(std::sqrt(3.0 * eps) * x / 2.0);
}

/// Leading-order w1 trace sampled on the collocation grid and projected onto the basis.
inline SurfaceTrace seed_profile(double gamma, double eps, const ModeBasis& basis) {
  if (!(eps > 0.0)) throw std::invalid_argument("seed_profile: eps must be positive");
  const Vector& x = basis.nodes();
  Vector v(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) v[j] = seed_value(gamma, eps, x[j]);
  return project(v, basis);
}

struct DispersionRoot {
  std::optional<double> k;
  /// gamma + alpha == 1: the root has merged into k = 0.
  bool boundary = false;
};

/// Positive k with k coth k = gamma + alpha, if any.
inline DispersionRoot dispersion_root(double gamma, double alpha) {
  const double target = gamma + alpha;
  constexpr double boundary_tol = 1e-14;
  if (std::abs(target - 1.0) <= boundary_tol) return {std::nullopt, true};
  if (target < 1.0) return {std::nullopt, false};

  auto f = [target](double k) { return dtn_symbol(k) - target; };
  auto df = [](double k) {
    if (k < 1e-4) return 2.0 * k / 3.0;
    const double s = std::sinh(k);
    return (k > 20.0) ? 1.0 : 1.0 / std::tanh(k) - k / (s * s);
  };
  // k coth k >= k and >= 1, so the root lies in (0, target]
  double lo = 0.0, hi = target;
  double k = std::min(target, std::sqrt(3.0 * (target - 1.0)));
  if (!(k > lo && k < hi)) k = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fk = f(k);
    if (fk == 0.0) break;
    (fk > 0.0 ? hi : lo) = k;
    double next = k - fk / df(k);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - k) <= 1e-16 * std::max(1.0, k)) {
      k = next;
      break;
    }
    k = next;
  }
  return {k, false};
}

struct ReducedOdeState {
  double Q = 0.0;
  /// dQ/dX
  double P = 0.0;
  double X = 0.0;
};

struct ReducedOdeRate {
  double dQ = 0.0;
  double dP = 0.0;
};

/// Leading-order scaled reduced equation (remainder dropped).
inline ReducedOdeRate reduced_ode_rhs(const ReducedOdeState& s, double gamma) {
  return {s.P, 3.0 * s.Q - 1.5 * nonlinear_coefficient(gamma) * s.Q * s.Q};
}

/// First integral of the truncated equation.
inline double reduced_ode_energy(const ReducedOdeState& s, double gamma) {
  return 0.5 * s.P * s.P - 1.5 * s.Q * s.Q + 0.5 * nonlinear_coefficient(gamma) * s.Q * s.Q * s.Q;
}

/// Turning point of the homoclinic loop on the Q axis.
inline double homoclinic_peak(double gamma) { return 3.0 / nonlinear_coefficient(gamma); }

inline double explicit_homoclinic(double gamma, double X) {
  return homoclinic_peak(gamma) * sech2(std::sqrt(3.0) * X / 2.0);
}

inline double explicit_homoclinic_slope(double gamma, double X) {
  const double z = std::sqrt(3.0) * X / 2.0;
  return -std::sqrt(3.0) * homoclinic_peak(gamma) * sech2(z) * std::tanh(z);
}

/// Jacobian of reduced_ode_rhs with respect to (Q, P).
inline Eigen::Matrix2d reduced_ode_linearization(double Q, double gamma) {
  Eigen::Matrix2d m;
  m << 0.0, 1.0, 3.0 - 3.0 * nonlinear_coefficient(gamma) * Q, 0.0;
  return m;
}

/// Eigenvalues of the linearization at the origin, sorted by real part.
inline std::array<std::complex<double>, 2> origin_eigenvalues(double gamma) {
  Eigen::EigenSolver<Eigen::Matrix2d> es(reduced_ode_linearization(0.0, gamma), false);
  std::array<std::complex<double>, 2> ev{es.eigenvalues()[0], es.eigenvalues()[1]};
  if (ev[0].real() > ev[1].real()) std::swap(ev[0], ev[1]);
  return ev;
}

/// Fixed-step RK4 over a span of length `span` (sign gives the direction).
inline std::vector<ReducedOdeState> integrate_reduced_ode(const ReducedOdeState& initial, double gamma,
                                                          double span, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("integrate_reduced_ode: step must be positive");
  const int n = static_cast<int>(std::ceil(std::abs(span) / step - 1e-12));
  const double h = n > 0 ? span / n : 0.0;
  std::vector<ReducedOdeState> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  ReducedOdeState s = initial;
  out.push_back(s);
  auto rate = [gamma](double Q, double P) { return reduced_ode_rhs({Q, P, 0.0}, gamma); };
  for (int i = 0; i < n; ++i) {
    const auto k1 = rate(s.Q, s.P);
    const auto k2 = rate(s.Q + 0.5 * h * k1.dQ, s.P + 0.5 * h * k1.dP);
    const auto k3 = rate(s.Q + 0.5 * h * k2.dQ, s.P + 0.5 * h * k2.dP);
    const auto k4 = rate(s.Q + h * k3.dQ, s.P + h * k3.dP);
    s.Q += h / 6.0 * (k1.dQ + 2.0 * k2.dQ + 2.0 * k3.dQ + k4.dQ);
    s.P += h / 6.0 * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    s.X = initial.X + (i + 1) * h;
    out.push_back(s);
  }
  return out;
}

}  // namespace solwave
