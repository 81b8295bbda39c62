/**
 * @file strip_harmonics.hpp
 * @brief Harmonic fields on the unit strip 0 < y < 1 that vanish on the bed.
 *
 * A field is stored through the even cosine series of its trace on the top
 * boundary y = 1,
 *
 *     t(x)   = sum_n a_n cos(k_n x),             k_n = n pi / L,
 *     w(x,y) = a_0 y + sum_{n>=1} a_n cos(k_n x) sinh(k_n y) / sinh(k_n),
 *
 * so the Dirichlet-to-Neumann map at y = 1 is diagonal with symbol k coth k.
 * All hyperbolic ratios go through exp-difference forms so that wavenumbers
 * up to ~1e4 never overflow.
 */
#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace solwave {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// k coth k, continuous at k = 0 where it equals 1.
inline double dtn_symbol(double k) {
  assert(k >= 0.0);
  if (k < 1e-8) return 1.0 + k * k / 3.0;
  return k / std::tanh(k);
}

/// sinh(k y) / sinh(k) for 0 <= y <= 1; tends to y as k -> 0.
inline double sinh_ratio(double k, double y) {
  if (k < 1e-12) return y;
  // e^{k(y-1)} (1 - e^{-2ky}) / (1 - e^{-2k})
  return std::exp(k * (y - 1.0)) * (-std::expm1(-2.0 * k * y)) / (-std::expm1(-2.0 * k));
}

/// cosh(k y) / sinh(k) times k, i.e. d/dy of sinh_ratio; tends to 1 as k -> 0.
inline double cosh_ratio_k(double k, double y) {
  if (k < 1e-12) return 1.0;
  return k * std::exp(k * (y - 1.0)) * (1.0 + std::exp(-2.0 * k * y)) / (-std::expm1(-2.0 * k));
}

/// cosh(k y) / sinh(k); used by the harmonic conjugate. Undefined at k = 0.
inline double cosh_ratio(double k, double y) {
  return cosh_ratio_k(k, y) / k;
}

/**
 * Truncated cosine basis on the half cell [0, L] together with its
 * oversampled collocation grid (M = 2N midpoints by default).
 *
 * The evaluation tables are built once and shared between copies; a basis
 * is immutable after construction.
 */
class ModeBasis {
 public:
  ModeBasis(double half_period, int mode_count, int node_count = 0)
      : half_period_(half_period), modes_(mode_count) {
    if (!(half_period > 0.0) || !std::isfinite(half_period))
      throw std::invalid_argument("ModeBasis: half period must be positive");
    if (mode_count < 1) throw std::invalid_argument("ModeBasis: need at least one mode");
    nodes_ = node_count > 0 ? node_count : 2 * mode_count;
    if (nodes_ < mode_count + 1)
      throw std::invalid_argument("ModeBasis: need at least N+1 collocation nodes");
    tables_ = std::make_shared<const Tables>(build(half_period_, modes_, nodes_));
  }

  double half_period() const { return half_period_; }
  /// N: highest mode index (there are N+1 coefficients).
  int mode_count() const { return modes_; }
  int size() const { return modes_ + 1; }
  /// M: number of collocation nodes.
  int node_count() const { return nodes_; }

  double wavenumber(int n) const { return n * std::numbers::pi / half_period_; }
  const Vector& wavenumbers() const { return tables_->k; }
  const Vector& symbols() const { return tables_->sigma; }
  const Vector& nodes() const { return tables_->x; }

  /// cos(k_n x_j), M x (N+1).
  const Matrix& cos_table() const { return tables_->cos; }
  /// sin(k_n x_j), M x (N+1).
  const Matrix& sin_table() const { return tables_->sin; }
  /// Discrete cosine projection nodes -> modes, (N+1) x M.
  const Matrix& projector() const { return tables_->proj; }

  bool same_as(const ModeBasis& other) const {
    return half_period_ == other.half_period_ && modes_ == other.modes_ && nodes_ == other.nodes_;
  }

  /// Same cell, modes scaled by `factor`; node count keeps the 2x ratio.
  ModeBasis refined(int factor) const {
    return ModeBasis(half_period_, modes_ * factor, nodes_ * factor);
  }

 private:
  struct Tables {
    Vector k, sigma, x;
    Matrix cos, sin, proj;
  };

  static Tables build(double L, int N, int M) {
    Tables t;
    t.k.resize(N + 1);
    t.sigma.resize(N + 1);
    for (int n = 0; n <= N; ++n) {
      t.k[n] = n * std::numbers::pi / L;
      t.sigma[n] = dtn_symbol(t.k[n]);
    }
    t.x.resize(M);
    for (int j = 0; j < M; ++j) t.x[j] = (j + 0.5) * L / M;
    t.cos.resize(M, N + 1);
    t.sin.resize(M, N + 1);
    for (int n = 0; n <= N; ++n) {
      for (int j = 0; j < M; ++j) {
        // reduce the phase exactly: k_n x_j = pi * n (2j+1) / (2M)
        const long long p = (static_cast<long long>(n) * (2 * j + 1)) % (4LL * M);
        const double phase = std::numbers::pi * static_cast<double>(p) / (2.0 * M);
        t.cos(j, n) = std::cos(phase);
        t.sin(j, n) = std::sin(phase);
      }
    }
    t.proj = t.cos.transpose();
    t.proj.row(0) *= 1.0 / M;
    if (N >= 1) t.proj.bottomRows(N) *= 2.0 / M;
    return t;
  }

  double half_period_;
  int modes_;
  int nodes_ = 0;
  std::shared_ptr<const Tables> tables_;
};

/// Cosine coefficients a_0..a_N of an even trace.
struct SurfaceTrace {
  Vector coeffs;

  static SurfaceTrace zero(const ModeBasis& basis) { return {Vector::Zero(basis.size())}; }
  static SurfaceTrace constant(const ModeBasis& basis, double c) {
    SurfaceTrace t = zero(basis);
    t.coeffs[0] = c;
    return t;
  }

  Eigen::Index size() const { return coeffs.size(); }
  /// Value at the crest x = 0.
  double crest() const { return coeffs.sum(); }

  SurfaceTrace operator+(const SurfaceTrace& o) const { return {coeffs + o.coeffs}; }
  SurfaceTrace operator-(const SurfaceTrace& o) const { return {coeffs - o.coeffs}; }
  SurfaceTrace operator*(double s) const { return {coeffs * s}; }
};

/// Sine coefficients b_1..b_N (index 0 unused, kept zero) of an odd trace.
struct SineTrace {
  Vector coeffs;
};

namespace detail {
inline void require_size(const SurfaceTrace& t, const ModeBasis& basis, const char* where) {
  if (t.size() != basis.size())
    throw std::invalid_argument(std::string(where) + ": trace has " + std::to_string(t.size()) +
                                " coefficients, basis expects " + std::to_string(basis.size()));
}
}  // namespace detail

/// Trace of d/dy w at y = 1.
inline SurfaceTrace dtn_apply(const SurfaceTrace& t, const ModeBasis& basis) {
  detail::require_size(t, basis, "dtn_apply");
  return {t.coeffs.cwiseProduct(basis.symbols())};
}

/// t'(x) = sum b_n sin(k_n x) with b_n = -k_n a_n.
inline SineTrace trace_x_derivative(const SurfaceTrace& t, const ModeBasis& basis) {
  detail::require_size(t, basis, "trace_x_derivative");
  return {-t.coeffs.cwiseProduct(basis.wavenumbers())};
}

/// Nodal values of an even trace on the collocation grid.
inline Vector synthesize(const SurfaceTrace& t, const ModeBasis& basis) {
  detail::require_size(t, basis, "synthesize");
  return basis.cos_table() * t.coeffs;
}

inline Vector synthesize(const SineTrace& s, const ModeBasis& basis) {
  return basis.sin_table() * s.coeffs;
}

/// Projection of nodal values onto the N+1 retained cosine modes.
inline SurfaceTrace project(const Vector& nodal, const ModeBasis& basis) {
  if (nodal.size() != basis.node_count())
    throw std::invalid_argument("project: nodal vector does not match the collocation grid");
  return {basis.projector() * nodal};
}

/// Evaluates the cosine series at an arbitrary abscissa.
inline double evaluate_trace(const SurfaceTrace& t, const ModeBasis& basis, double x) {
  double s = 0.0;
  for (int n = 0; n < basis.size(); ++n) s += t.coeffs[n] * std::cos(basis.wavenumber(n) * x);
  return s;
}

inline double evaluate_trace_dx(const SurfaceTrace& t, const ModeBasis& basis, double x) {
  double s = 0.0;
  for (int n = 1; n < basis.size(); ++n) {
    const double k = basis.wavenumber(n);
    s -= t.coeffs[n] * k * std::sin(k * x);
  }
  return s;
}

namespace detail {
inline void require_depth(double y) {
  if (!(y >= 0.0 && y <= 1.0))
    throw std::domain_error("strip evaluation: y = " + std::to_string(y) + " outside [0, 1]");
}
}  // namespace detail

/// w(x, y) of the harmonic field with the given surface trace.
inline double evaluate_interior(const SurfaceTrace& t, const ModeBasis& basis, double x, double y) {
  detail::require_size(t, basis, "evaluate_interior");
  detail::require_depth(y);
  if (y == 0.0) return 0.0;
  double s = t.coeffs[0] * y;
  for (int n = 1; n < basis.size(); ++n) {
    const double k = basis.wavenumber(n);
    s += t.coeffs[n] * std::cos(k * x) * sinh_ratio(k, y);
  }
  return s;
}

struct Gradient {
  double dx = 0.0;
  double dy = 0.0;
};

/// (w_x, w_y) of the harmonic field with the given surface trace.
inline Gradient evaluate_gradient_interior(const SurfaceTrace& t, const ModeBasis& basis, double x,
                                           double y) {
  detail::require_size(t, basis, "evaluate_gradient_interior");
  detail::require_depth(y);
  Gradient g{0.0, t.coeffs[0]};
  for (int n = 1; n < basis.size(); ++n) {
    const double k = basis.wavenumber(n);
    const double a = t.coeffs[n];
    g.dx -= a * k * std::sin(k * x) * sinh_ratio(k, y);
    g.dy += a * std::cos(k * x) * cosh_ratio_k(k, y);
  }
  return g;
}

/// Sum of squares beyond the first `keep` modes relative to the whole trace.
inline double spectral_tail(const SurfaceTrace& t, int keep) {
  const double total = t.coeffs.squaredNorm();
  if (total == 0.0) return 0.0;
  const auto n = t.coeffs.size();
  if (keep >= n) return 0.0;
  return std::sqrt(t.coeffs.tail(n - keep).squaredNorm() / total);
}

/// Re-expresses a trace on another basis with the same half period.
inline SurfaceTrace resample(const SurfaceTrace& t, const ModeBasis& from, const ModeBasis& to) {
  if (from.half_period() != to.half_period())
    throw std::invalid_argument("resample: bases differ in half period");
  SurfaceTrace out = SurfaceTrace::zero(to);
  const auto n = std::min(t.coeffs.size(), out.coeffs.size());
  out.coeffs.head(n) = t.coeffs.head(n);
  return out;
}

}  // namespace solwave
