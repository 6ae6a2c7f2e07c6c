#pragma once

#include <optional>

#include <Eigen/Core>

#include "dqcalib/constraints.hpp"
#include "dqcalib/dualquat.hpp"

namespace dqcalib {

struct LocalSolveOptions {
  int max_iter = 100;
  double tol_kkt = 1e-10;
  double tol_step = 1e-12;
  /// Starting point; the identity DQ when empty. Projected onto the constraint set first.
  std::optional<Vec8> init;
};

struct LocalSolution {
  Vec8 q_hat = Vec8::Zero();
  /// (lambda1, lambda2) or, in planar mode, (lambda1, lambda2, +inf, lambda4).
  Multipliers lambda;
  /// Planar mode only: multipliers of the linear constraints q2 = 0 and q3 = 0.
  Eigen::Vector2d linear_multipliers = Eigen::Vector2d::Zero();
  double cost = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Restores feasibility: normalizes the real part (after zeroing q2, q3 in planar
/// mode), then removes the dual components that violate g2 (and g4). The result
/// is canonical. Throws DegenerateInit if the real part vanishes.
Vec8 project_to_constraints(const Vec8& q, ConstraintMode mode);

/// Minimizes q^T Q q subject to the unit-DQ constraints (plus q2 = q3 = 0 and g4 = 0
/// in planar mode) with an SQP iteration that keeps every iterate feasible:
/// each step solves the equality-constrained QP on the tangent space of the
/// constraint set, with the Lagrangian Hessian made positive definite there,
/// followed by projection and an Armijo backtrack on the cost.
///
/// Never throws for lack of convergence; `converged` is false instead and the
/// best iterate is returned.
LocalSolution solve_local(const Mat8& Q, ConstraintMode mode, const LocalSolveOptions& opts = {});

}  // namespace dqcalib
