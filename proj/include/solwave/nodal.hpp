#pragma once

#include "solwave/wave_operator.hpp"

#include <cmath>

namespace solwave {

struct NodalCheck {
  bool holds = true;
  /// eta_x vanishes identically (laminar state); holds, but not strictly.
  bool trivial_flat = false;
  /// Largest eta_x found with x > 0, and where.
  double worst = 0.0;
  double worst_x = 0.0;
  double worst_y = 1.0;
};

/// eta_x = w1_x < 0 on the surface nodes with x > 0 and on an interior sample grid.
inline NodalCheck nodal_check(const ReducedState& s, double tolerance = 1e-12, int interior_rows = 3) {
  const ModeBasis& b = s.basis;
  NodalCheck out;
  out.worst = -std::numeric_limits<double>::infinity();
  double largest = 0.0;

  const Vector surface = synthesize(trace_x_derivative(s.w1, b), b);
  const Vector& x = b.nodes();
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    largest = std::max(largest, std::abs(surface[j]));
    if (surface[j] > out.worst) {
      out.worst = surface[j];
      out.worst_x = x[j];
      out.worst_y = 1.0;
    }
  }

  // interior: every fourth node column on a few levels
  const int stride = std::max<int>(1, static_cast<int>(x.size()) / 64);
  for (int r = 1; r <= interior_rows; ++r) {
    const double y = static_cast<double>(r) / (interior_rows + 1);
    for (Eigen::Index j = 0; j < x.size(); j += stride) {
      const double v = evaluate_gradient_interior(s.w1, b, x[j], y).dx;
      largest = std::max(largest, std::abs(v));
      if (v > out.worst) {
        out.worst = v;
        out.worst_x = x[j];
        out.worst_y = y;
      }
    }
  }

  out.trivial_flat = largest < 1e-14;
  out.holds = out.trivial_flat || out.worst < tolerance;
  return out;
}

}  // namespace solwave
