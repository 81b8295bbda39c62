/**
 * @file conjugate_flows.hpp
 * @brief Laminar flows of depth d with the same vorticity and discharge as the
 *        unit-depth flow: Bernoulli constant Q(d) and flow force S(d).
 */
#pragma once

#include "solwave/wave_operator.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace solwave {

namespace detail {
inline void require_depth_positive(double d, const char* where) {
  if (!(d > 0.0)) throw std::invalid_argument(std::string(where) + ": depth must be positive");
}
}  // namespace detail

/// Bernoulli constant of the laminar flow of depth d; qhat(1) == 1.
inline double qhat(double d, const Parameters& p) {
  detail::require_depth_positive(d, "qhat");
  const double g = p.gamma;
  const double top = (2.0 - g) / 2.0 + g * d * d / 2.0;
  return top * top / (d * d) + 2.0 * p.alpha * (d - 1.0);
}

/// dQ/dd = gamma^2 d / 2 - 2 c^2 / d^3 + 2 alpha, c = (2 - gamma) / 2.
inline double qhat_derivative(double d, const Parameters& p) {
  const double c = (2.0 - p.gamma) / 2.0;
  return p.gamma * p.gamma * d / 2.0 - 2.0 * c * c / (d * d * d) + 2.0 * p.alpha;
}

inline double qhat_second_derivative(double d, const Parameters& p) {
  const double c = (2.0 - p.gamma) / 2.0;
  return p.gamma * p.gamma / 2.0 + 6.0 * c * c / (d * d * d * d);
}

/// Flow force of the laminar flow of depth d, normalized by the unit-depth Bernoulli constant.
inline double shat(double d, const Parameters& p) {
  detail::require_depth_positive(d, "shat");
  const double g = p.gamma, a = p.alpha;
  return (2.0 - g) * (2.0 - g) / (8.0 * d) - g * g * d * d * d / 24.0 - (2.0 - g) * g * d / 4.0 + d * a -
         d * d * a / 2.0 + qhat(1.0, p) * d / 2.0;
}

/// Minimizer of qhat over d > 0.
inline double d_critical(const Parameters& p) {
  if (!(p.alpha > 0.0)) throw std::invalid_argument("d_critical: alpha must be positive");
  // qhat' is increasing, -> -inf at 0+ and > 0 for large d
  double lo = 1.0, hi = 1.0;
  while (qhat_derivative(lo, p) > 0.0) lo *= 0.5;
  while (qhat_derivative(hi, p) < 0.0) hi *= 2.0;
  double d = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = qhat_derivative(d, p);
    if (f == 0.0) break;
    (f > 0.0 ? hi : lo) = d;
    double next = d - f / qhat_second_derivative(d, p);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - d) <= 1e-16 * d) {
      d = next;
      break;
    }
    d = next;
  }
  return d;
}

struct ConjugateDepth {
  std::optional<double> d;
  /// alpha == alpha_cr: the conjugate depth has merged with d = 1.
  bool degenerate = false;
};

/// The depth d != 1 with qhat(d) == qhat(1).
inline ConjugateDepth conjugate_depth(const Parameters& p, double degenerate_tol = 1e-14) {
  if (!(p.alpha > 0.0)) throw std::invalid_argument("conjugate_depth: alpha must be positive");
  if (std::abs(p.alpha - p.alpha_cr()) <= degenerate_tol) return {std::nullopt, true};
  const double dcr = d_critical(p);
  const double q1 = qhat(1.0, p);
  auto f = [&](double d) { return qhat(d, p) - q1; };

  // the root sits on the side of d_cr away from 1
  double lo, hi;
  if (dcr > 1.0) {
    lo = dcr;
    hi = 2.0 * dcr;
    while (f(hi) < 0.0) hi *= 2.0;
  } else {
    hi = dcr;
    lo = 0.5 * dcr;
    while (f(lo) < 0.0) lo *= 0.5;
  }
  // f < 0 at d_cr, f > 0 at the far end
  const bool increasing = dcr > 1.0;
  double d = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const double v = f(d);
    if (v == 0.0) break;
    if ((v > 0.0) == increasing)
      hi = d;
    else
      lo = d;
    double next = d - v / qhat_derivative(d, p);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - d) <= 1e-16 * d) {
      d = next;
      break;
    }
    d = next;
  }
  return {d, false};
}

}  // namespace solwave
