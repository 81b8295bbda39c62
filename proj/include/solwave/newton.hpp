/**
 * @file newton.hpp
 * @brief Damped Newton corrector for the projected dynamic condition, with an
 *        optional pseudo-arclength border that frees alpha.
 */
#pragma once

#include "solwave/wave_operator.hpp"

#include <Eigen/LU>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace solwave {

struct NewtonSettings {
  /// Sup norm of the dealiased residual on the grid.
  double tol_residual = 1e-10;
  int max_iter = 25;
  /// Backtracking factor applied to the step when the residual does not drop.
  double damping = 0.5;
  int max_backtracks = 12;

  void validate() const {
    if (!(tol_residual > 0.0)) throw std::invalid_argument("NewtonSettings: tol_residual must be positive");
    if (max_iter < 1) throw std::invalid_argument("NewtonSettings: max_iter must be at least 1");
    if (!(damping > 0.0 && damping < 1.0))
      throw std::invalid_argument("NewtonSettings: damping must lie in (0, 1)");
  }
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { NewtonDivergence, SingularJacobian, TrivialCollapse };

  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline const char* to_string(SolverError::Kind k) {
  switch (k) {
    case SolverError::Kind::NewtonDivergence: return "NewtonDivergence";
    case SolverError::Kind::SingularJacobian: return "SingularJacobian";
    case SolverError::Kind::TrivialCollapse: return "TrivialCollapse";
  }
  return "?";
}

/// Sup norm on the grid of the residual after projection onto the retained modes.
inline double residual_norm(const ReducedState& s) {
  if (!std::isfinite(s.params.alpha)) return std::numeric_limits<double>::infinity();
  const Vector r = s.basis.cos_table() * projected_residual(s);
  return r.allFinite() ? r.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
}

/**
 * Pseudo-arclength border: the corrected point (a, alpha) must satisfy
 *     <tangent, (a, alpha) - anchor>_w = 0,
 * with <(a, p), (b, q)>_w = a.b + alpha_weight^2 p q.
 */
struct ArclengthConstraint {
  Vector tangent_coeffs;
  double tangent_alpha = 0.0;
  Vector anchor_coeffs;
  double anchor_alpha = 0.0;
  double alpha_weight = 10.0;

  double value(const Vector& a, double alpha) const {
    return tangent_coeffs.dot(a - anchor_coeffs) +
           alpha_weight * alpha_weight * tangent_alpha * (alpha - anchor_alpha);
  }
};

struct NewtonResult {
  ReducedState state;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline Vector solve_checked(const Matrix& A, const Vector& rhs) {
  Eigen::PartialPivLU<Matrix> lu(A);
  const double scale = A.cwiseAbs().maxCoeff();
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > 1e-14 * scale))
    throw SolverError(SolverError::Kind::SingularJacobian,
                      "Newton: pivot " + std::to_string(pivot) + " below 1e-14 * " + std::to_string(scale));
  return lu.solve(rhs);
}

}  // namespace detail

/**
 * Corrects `initial` until the dealiased residual is below settings.tol_residual.
 * Without a constraint alpha stays fixed; with one, (coeffs, alpha) are solved
 * jointly through the bordered system.
 */
inline NewtonResult newton_solve(const ReducedState& initial, const NewtonSettings& settings,
                                 const std::optional<ArclengthConstraint>& constraint = std::nullopt) {
  settings.validate();
  ReducedState s = initial;
  double res = residual_norm(s);
  if (!std::isfinite(res))
    throw SolverError(SolverError::Kind::NewtonDivergence, "Newton: initial residual is not finite");
  const int n = s.basis.size();

  auto merit = [&](const ReducedState& st, double r) {
    return constraint ? std::max(r, std::abs(constraint->value(st.w1.coeffs, st.params.alpha))) : r;
  };
  double current = merit(s, res);

  for (int it = 0; it < settings.max_iter; ++it) {
    if (current <= settings.tol_residual) return {s, it, res};

    const ProjectedJacobian J = projected_jacobian(s);
    const Vector F = projected_residual(s);
    Vector da;
    double dalpha = 0.0;
    if (!constraint) {
      da = detail::solve_checked(J.matrix, -F);
    } else {
      const ArclengthConstraint& c = *constraint;
      Matrix A(n + 1, n + 1);
      A.topLeftCorner(n, n) = J.matrix;
      A.topRightCorner(n, 1) = J.d_alpha;
      A.bottomLeftCorner(1, n) = c.tangent_coeffs.transpose();
      A(n, n) = c.alpha_weight * c.alpha_weight * c.tangent_alpha;
      Vector rhs(n + 1);
      rhs.head(n) = -F;
      rhs[n] = -c.value(s.w1.coeffs, s.params.alpha);
      const Vector d = detail::solve_checked(A, rhs);
      da = d.head(n);
      dalpha = d[n];
    }

    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= settings.max_backtracks; ++bt) {
      ReducedState trial = s;
      trial.w1.coeffs += lambda * da;
      trial.params.alpha += lambda * dalpha;
      const double r = residual_norm(trial);
      const double m = merit(trial, r);
      if (std::isfinite(m) && m < current) {
        s = std::move(trial);
        res = r;
        current = m;
        accepted = true;
        break;
      }
      lambda *= settings.damping;
    }
    if (!accepted)
      throw SolverError(SolverError::Kind::NewtonDivergence,
                        "Newton: residual " + std::to_string(current) +
                            " does not decrease under full backtracking");
  }
  if (current <= settings.tol_residual) return {s, settings.max_iter, res};
  throw SolverError(SolverError::Kind::NewtonDivergence,
                    "Newton: no convergence in " + std::to_string(settings.max_iter) +
                        " iterations (residual " + std::to_string(current) + ")");
}

}  // namespace solwave
