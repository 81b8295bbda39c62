/**
 * @file diagnostics.hpp
 * @brief Exactness checks on converged solutions: flow force, the flux
 *        function on the surface, the integral identity, velocity field,
 *        stagnation/critical layers, surface reconstruction and the psi bound.
 *
 * Fields in the strip: eta = y + w1, zeta = (1 - gamma) y + w2, where w2 is
 * the harmonic extension of the eliminated trace.
 */
#pragma once

#include "solwave/conjugate_flows.hpp"
#include "solwave/nodal.hpp"
#include "solwave/wave_operator.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace solwave {

/// First derivatives of eta and zeta at one point, plus eta itself.
struct StripPoint {
  double eta = 0.0;
  double eta_x = 0.0, eta_y = 1.0;
  double zeta_x = 0.0, zeta_y = 1.0;
};

/**
 * Evaluates (eta, zeta) derivatives along a vertical line x = const.
 * cos/sin of k_n x are computed once per column.
 */
class StripColumn {
 public:
  StripColumn(const ReducedState& s, const SurfaceTrace& w2, double x)
      : a_(s.w1.coeffs), b_(w2.coeffs), k_(s.basis.wavenumbers()), gamma_(s.params.gamma) {
    const auto n = k_.size();
    c_.resize(n);
    s_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      c_[i] = std::cos(k_[i] * x);
      s_[i] = std::sin(k_[i] * x);
    }
  }

  StripPoint at(double y) const {
    detail::require_depth(y);
    double w1 = a_[0] * y, w1x = 0.0, w1y = a_[0], w2x = 0.0, w2y = b_[0];
    for (Eigen::Index i = 1; i < k_.size(); ++i) {
      const double k = k_[i];
      const double sr = sinh_ratio(k, y);
      const double cr = cosh_ratio_k(k, y);
      w1 += a_[i] * c_[i] * sr;
      w1x -= a_[i] * k * s_[i] * sr;
      w1y += a_[i] * c_[i] * cr;
      w2x -= b_[i] * k * s_[i] * sr;
      w2y += b_[i] * c_[i] * cr;
    }
    return {y + w1, w1x, 1.0 + w1y, w2x, (1.0 - gamma_) + w2y};
  }

 private:
  Vector a_, b_, k_, c_, s_;
  double gamma_;
};

namespace detail {

inline double grad_sq_checked(const StripPoint& p) {
  const double d = p.eta_x * p.eta_x + p.eta_y * p.eta_y;
  if (!(d >= 1e-14)) throw std::domain_error("diagnostics: |grad eta|^2 below 1e-14");
  return d;
}

/// Momentum-flux density integrated in y by the flow force.
inline double flux_density(const StripPoint& p) {
  const double d = grad_sq_checked(p);
  return (p.eta_y * (p.zeta_y * p.zeta_y - p.zeta_x * p.zeta_x) + 2.0 * p.eta_x * p.zeta_x * p.zeta_y) / d;
}

inline double surface_potential(double eta, const Parameters& p) {
  const double g = p.gamma, a = p.alpha;
  return g * g * eta * eta * eta / 6.0 + a * eta * eta / 2.0 - (2.0 * a + 1.0) * eta / 2.0;
}

template <typename F>
double gauss_64(F&& f) {
  // nodes on [0, 1]
  return boost::math::quadrature::gauss<double, 64>::integrate(f, 0.0, 1.0);
}

}  // namespace detail

/// Stations {0, L/8, ..., L}.
inline std::vector<double> default_stations(const ModeBasis& b, int count = 9) {
  std::vector<double> x(count);
  for (int i = 0; i < count; ++i) x[i] = b.half_period() * i / (count - 1);
  return x;
}

inline double flow_force(const ReducedState& s, double x) {
  const SurfaceTrace w2 = eliminate_w2(s.w1, s.params.gamma, s.basis);
  const StripColumn col(s, w2, x);
  const double integral = detail::gauss_64([&](double y) { return detail::flux_density(col.at(y)); });
  return 0.5 * integral - detail::surface_potential(col.at(1.0).eta, s.params);
}

struct FlowForce {
  std::vector<double> stations;
  std::vector<double> values;
  double spread = 0.0;
  double mean = 0.0;
};

inline FlowForce flow_force_profile(const ReducedState& s, const std::vector<double>& stations) {
  const SurfaceTrace w2 = eliminate_w2(s.w1, s.params.gamma, s.basis);
  FlowForce out;
  out.stations = stations;
  for (double x : stations) {
    const StripColumn col(s, w2, x);
    const double integral = detail::gauss_64([&](double y) { return detail::flux_density(col.at(y)); });
    out.values.push_back(0.5 * integral - detail::surface_potential(col.at(1.0).eta, s.params));
  }
  if (!out.values.empty()) {
    const auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
    out.spread = *hi - *lo;
    double sum = 0.0;
    for (double v : out.values) sum += v;
    out.mean = sum / static_cast<double>(out.values.size());
  }
  return out;
}

inline double flow_force_spread(const ReducedState& s, const std::vector<double>& stations) {
  return flow_force_profile(s, stations).spread;
}

struct PhiCheck {
  /// max over stations of |Phi(x,1) - RHS(x)|
  double max_abs = 0.0;
  /// the same, divided by max(1, |Phi|) station-wise
  double max_rel = 0.0;
  std::vector<double> phi;
  std::vector<double> rhs;
};

/**
 * Phi(x,1) = int_0^1 [flux density + (1 - gamma^2) eta_y + 2(gamma - 1)] dy against
 * (alpha + gamma^2)(eta - 1)^2 + (gamma^2/3)(eta - 1)^3. The far field is the
 * laminar unit-depth flow.
 */
inline PhiCheck phi_surface_check(const ReducedState& s, const std::vector<double>& stations) {
  const double g = s.params.gamma, a = s.params.alpha;
  const SurfaceTrace w2 = eliminate_w2(s.w1, g, s.basis);
  PhiCheck out;
  for (double x : stations) {
    const StripColumn col(s, w2, x);
    const double phi = detail::gauss_64([&](double y) {
      const StripPoint p = col.at(y);
      return detail::flux_density(p) + (1.0 - g * g) * p.eta_y + 2.0 * (g - 1.0);
    });
    const double h = col.at(1.0).eta - 1.0;
    const double rhs = (a + g * g) * h * h + g * g * h * h * h / 3.0;
    const double diff = std::abs(phi - rhs);
    out.phi.push_back(phi);
    out.rhs.push_back(rhs);
    out.max_abs = std::max(out.max_abs, diff);
    out.max_rel = std::max(out.max_rel, diff / std::max(1.0, std::abs(phi)));
  }
  return out;
}

inline PhiCheck phi_surface_check(const ReducedState& s) {
  return phi_surface_check(s, default_stations(s.basis));
}

struct IntegralIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  /// int w1, int w1 w1y, int w1^2, int w1^3 over one period on y = 1.
  double int_w1 = 0.0, int_w1_w1y = 0.0, int_w1_sq = 0.0, int_w1_cube = 0.0;
  /// |lhs - rhs| / max(1, |lhs|)
  double residual = 0.0;
};

/// Period integrals by the midpoint rule on the collocation grid; exact for the cubic term since M = 2N.
inline IntegralIdentity integral_identity_check(const ReducedState& s) {
  const ModeBasis& b = s.basis;
  const double g = s.params.gamma, a = s.params.alpha;
  const Eigen::ArrayXd w = synthesize(s.w1, b).array();
  const Eigen::ArrayXd wy = synthesize(dtn_apply(s.w1, b), b).array();
  const double weight = 2.0 * b.half_period() / b.node_count();

  IntegralIdentity out;
  out.int_w1 = weight * w.sum();
  out.int_w1_w1y = weight * (w * wy).sum();
  out.int_w1_sq = weight * w.square().sum();
  out.int_w1_cube = weight * w.cube().sum();
  out.lhs = (1.0 - a - g) * out.int_w1;
  out.rhs = a * out.int_w1_w1y + (a + g * g) / 2.0 * out.int_w1_sq + g * g / 6.0 * out.int_w1_cube;
  out.residual = std::abs(out.lhs - out.rhs) / std::max(1.0, std::abs(out.lhs));
  return out;
}

struct Velocity {
  double u = 0.0;
  double v = 0.0;
};

inline Velocity velocity_from(const StripPoint& p, double gamma) {
  const double d = detail::grad_sq_checked(p);
  return {(p.eta_x * p.zeta_x + p.eta_y * p.zeta_y) / d + gamma * p.eta,
          (p.eta_x * p.zeta_y - p.eta_y * p.zeta_x) / d};
}

/// Moving-frame velocity at (x, y).
inline Velocity velocity(const ReducedState& s, double x, double y) {
  const SurfaceTrace w2 = eliminate_w2(s.w1, s.params.gamma, s.basis);
  return velocity_from(StripColumn(s, w2, x).at(y), s.params.gamma);
}

struct SurfaceVelocityCheck {
  /// max |u^2 + v^2 + 2 alpha (eta - 1) - 1| on the grid
  double dynamic = 0.0;
  /// max |u eta_x - v eta_y| on the grid
  double kinematic = 0.0;
};

inline SurfaceVelocityCheck surface_velocity_check(const ReducedState& s) {
  const ModeBasis& b = s.basis;
  const double g = s.params.gamma, a = s.params.alpha;
  const SurfaceTrace w2 = eliminate_w2(s.w1, g, b);
  const Vector w1 = synthesize(s.w1, b);
  const Vector w1x = synthesize(trace_x_derivative(s.w1, b), b);
  const Vector w1y = synthesize(dtn_apply(s.w1, b), b);
  const Vector w2x = synthesize(trace_x_derivative(w2, b), b);
  const Vector w2y = synthesize(dtn_apply(w2, b), b);
  SurfaceVelocityCheck out;
  for (Eigen::Index j = 0; j < w1.size(); ++j) {
    const StripPoint p{1.0 + w1[j], w1x[j], 1.0 + w1y[j], w2x[j], (1.0 - g) + w2y[j]};
    const Velocity vel = velocity_from(p, g);
    out.dynamic = std::max(out.dynamic, std::abs(vel.u * vel.u + vel.v * vel.v + 2.0 * a * w1[j] - 1.0));
    out.kinematic = std::max(out.kinematic, std::abs(vel.u * p.eta_x - vel.v * p.eta_y));
  }
  return out;
}

struct ScanGrid {
  int nx = 129;
  int ny = 33;
  /// speed^2 below this counts as near-stagnation
  double threshold = 1e-4;
};

struct StagnationPoint {
  double x = 0.0, y = 0.0, speed2 = 0.0;
};

struct CriticalLayerCrossing {
  double x = 0.0, y = 0.0;
};

struct StagnationReport {
  std::vector<StagnationPoint> points;
  std::vector<CriticalLayerCrossing> critical_layers;
  double min_speed2 = std::numeric_limits<double>::infinity();
  /// 1 - 2 alpha w1(0): crest speed^2 from the surface Bernoulli condition
  double crest_speed2 = 1.0;
};

/// Local minima of u^2 + v^2 on a grid over [0, L] x [0, 1], plus sign changes of u along columns.
inline StagnationReport stagnation_scan(const ReducedState& s, const ScanGrid& grid = {}) {
  if (grid.nx < 2 || grid.ny < 2) throw std::invalid_argument("stagnation_scan: grid needs at least 2x2 points");
  const double L = s.basis.half_period();
  const double g = s.params.gamma;
  const SurfaceTrace w2 = eliminate_w2(s.w1, g, s.basis);
  Matrix speed2(grid.nx, grid.ny), u(grid.nx, grid.ny);
  std::vector<double> xs(grid.nx), ys(grid.ny);
  for (int j = 0; j < grid.ny; ++j) ys[j] = static_cast<double>(j) / (grid.ny - 1);
  for (int i = 0; i < grid.nx; ++i) {
    xs[i] = L * i / (grid.nx - 1);
    const StripColumn col(s, w2, xs[i]);
    for (int j = 0; j < grid.ny; ++j) {
      const Velocity v = velocity_from(col.at(ys[j]), g);
      u(i, j) = v.u;
      speed2(i, j) = v.u * v.u + v.v * v.v;
    }
  }

  StagnationReport out;
  out.min_speed2 = speed2.minCoeff();
  out.crest_speed2 = 1.0 - 2.0 * s.params.alpha * s.w1.crest();
  // neighbours mirror across x = 0 and x = L (even symmetry of the speed)
  auto at = [&](int i, int j) {
    if (i < 0) i = -i;
    if (i >= grid.nx) i = 2 * (grid.nx - 1) - i;
    return speed2(i, j);
  };
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const double v = speed2(i, j);
      if (v >= grid.threshold) continue;
      bool minimum = true;
      for (int di = -1; di <= 1 && minimum; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int jj = j + dj;
          if (jj < 0 || jj >= grid.ny) continue;
          if (at(i + di, jj) < v) {
            minimum = false;
            break;
          }
        }
      if (minimum) out.points.push_back({xs[i], ys[j], v});
    }
    for (int j = 0; j + 1 < grid.ny; ++j) {
      const double u0 = u(i, j), u1 = u(i, j + 1);
      if ((u0 < 0.0) != (u1 < 0.0)) {
        const double t = u0 / (u0 - u1);
        out.critical_layers.push_back({xs[i], ys[j] + t * (ys[j + 1] - ys[j])});
      }
    }
  }
  return out;
}

struct SurfacePoint {
  double x = 0.0;
  double X = 0.0;
  double Y = 1.0;
};

struct PhysicalSurface {
  std::vector<SurfacePoint> points;
  bool overhang = false;
  /// inf over the surface of xi_x = 1 + w1y
  double min_xi_x = 1.0;
};

/**
 * Harmonic conjugate of w1 with xi_x = eta_y, xi_y = -eta_x and xi(0, y) = 0:
 *     xi(x, y) = (1 + a_0) x + sum_{n>=1} a_n sin(k_n x) cosh(k_n y) / sinh(k_n).
 */
inline double evaluate_conjugate(const SurfaceTrace& t, const ModeBasis& b, double x, double y) {
  detail::require_size(t, b, "evaluate_conjugate");
  detail::require_depth(y);
  double s = (1.0 + t.coeffs[0]) * x;
  for (int n = 1; n < b.size(); ++n) {
    const double k = b.wavenumber(n);
    s += t.coeffs[n] * std::sin(k * x) * cosh_ratio(k, y);
  }
  return s;
}

inline PhysicalSurface reconstruct_surface(const ReducedState& s, int samples = 257) {
  if (samples < 2) throw std::invalid_argument("reconstruct_surface: need at least 2 samples");
  const ModeBasis& b = s.basis;
  PhysicalSurface out;
  out.points.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double x = b.half_period() * i / (samples - 1);
    out.points.push_back({x, evaluate_conjugate(s.w1, b, x, 1.0), 1.0 + evaluate_trace(s.w1, b, x)});
  }
  const SurfaceFields f = surface_samples(s);
  out.min_xi_x = (1.0 + f.w1y.array()).minCoeff();
  out.overhang = out.min_xi_x < 0.0;
  return out;
}

struct PsiBound {
  bool ok = true;
  double psi_y_min = 0.0;
  double psi_y_max = 0.0;
  /// bounds that applied; NaN when the sign of gamma excludes one
  double upper = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
};

/**
 * psi = zeta + gamma eta^2 / 2 has psi_y = 1 + w2y + gamma (w1 + w1y + w1 w1y) on the surface.
 * gamma <= 0: psi_y < 1 - gamma/2; gamma >= 0: psi_y > min(2 - gamma, gamma inf |grad eta|^2).
 * At gamma = 0 the first bound holds with equality.
 */
inline PsiBound psi_bound_check(const ReducedState& s) {
  const double g = s.params.gamma;
  const SurfaceFields f = surface_samples(s);
  const Vector psi_y = detail::bernoulli_head(f, g);
  PsiBound out;
  out.psi_y_min = psi_y.minCoeff();
  out.psi_y_max = psi_y.maxCoeff();
  if (g < 0.0) {
    out.upper = 1.0 - g / 2.0;
    out.ok = out.ok && out.psi_y_max < out.upper;
  } else if (g == 0.0) {
    // psi = y exactly when gamma = 0, so the upper bound is attained
    out.upper = 1.0;
    out.ok = out.ok && out.psi_y_max <= out.upper + 1e-9;
  }
  if (g >= 0.0) {
    // inf |grad eta|^2 over the closed strip: surface, bed and interior levels
    double inf = detail::grad_eta_sq(f).minCoeff();
    if (g > 0.0) {
      const double L = s.basis.half_period();
      for (int r = 0; r < 8; ++r) {
        const double y = r / 8.0;
        for (int j = 0; j <= 64; ++j) {
          const Gradient gr = evaluate_gradient_interior(s.w1, s.basis, L * j / 64.0, y);
          inf = std::min(inf, gr.dx * gr.dx + (1.0 + gr.dy) * (1.0 + gr.dy));
        }
      }
    }
    out.lower = std::min(2.0 - g, g * inf);
    out.ok = out.ok && out.psi_y_min > out.lower;
  }
  return out;
}

struct DiagnosticsReport {
  std::vector<double> flow_force_values;
  double flow_force_spread = 0.0;
  double flow_force = 0.0;
  /// Ŝ(1), the far-field value
  double flow_force_laminar = 0.0;
  double phi_identity_residual = 0.0;
  double integral_identity_residual = 0.0;
  double lopatinskii = 0.0;
  Monitor monitor;
  bool nodal = true;
  bool nodal_strict = false;
  bool overhang = false;
  std::vector<StagnationPoint> stagnation_points;
  std::size_t critical_layer_crossings = 0;
  bool psi_bound_ok = true;
  double complementing_residual = 0.0;
  double dynamic_velocity_residual = 0.0;
  double kinematic_velocity_residual = 0.0;
};

struct DiagnosticsSettings {
  int stations = 9;
  ScanGrid scan;
  bool stagnation = true;
};

inline DiagnosticsReport diagnose(const ReducedState& s, const DiagnosticsSettings& settings = {}) {
  DiagnosticsReport r;
  const FlowForce ff = flow_force_profile(s, default_stations(s.basis, settings.stations));
  r.flow_force_values = ff.values;
  r.flow_force_spread = ff.spread;
  r.flow_force = ff.mean;
  r.flow_force_laminar = shat(1.0, s.params);
  r.phi_identity_residual = phi_surface_check(s, ff.stations).max_rel;
  r.integral_identity_residual = integral_identity_check(s).residual;
  r.lopatinskii = lopatinskii_constant(s);
  r.monitor = monitor(s);
  const NodalCheck nc = nodal_check(s);
  r.nodal = nc.holds;
  r.nodal_strict = nc.holds && !nc.trivial_flat;
  r.overhang = reconstruct_surface(s, 2).overhang;
  if (settings.stagnation) {
    const StagnationReport st = stagnation_scan(s, settings.scan);
    r.stagnation_points = st.points;
    r.critical_layer_crossings = st.critical_layers.size();
  }
  r.psi_bound_ok = psi_bound_check(s).ok;
  r.complementing_residual = complementing_identity(s).max_rel;
  const SurfaceVelocityCheck sv = surface_velocity_check(s);
  r.dynamic_velocity_residual = sv.dynamic;
  r.kinematic_velocity_residual = sv.kinematic;
  return r;
}

}  // namespace solwave
