#pragma once

#include <Eigen/Core>

#include "dqcalib/dualquat.hpp"

namespace dqcalib {

/// full3D: unit-DQ constraints g1, g2.
/// planar: additionally g3 = q2^2 + q3^2 (rotation about z only) and
/// g4 = q1 q8 - q4 q5 (no z translation). Indices are 1-based over vec(q).
enum class ConstraintMode { full3D, planar };

int constraint_count(ConstraintMode mode);
const char* to_string(ConstraintMode mode);

/// Lagrange multipliers, index-aligned with (g1, g2, g3, g4).
struct Multipliers {
  Eigen::VectorXd values;

  static Multipliers zero(ConstraintMode mode);
  ConstraintMode mode() const { return values.size() == 4 ? ConstraintMode::planar : ConstraintMode::full3D; }
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
};

Multipliers make_multipliers(ConstraintMode mode, std::initializer_list<double> values);

/// Constraint residuals (g1, g2[, g3, g4]).
Eigen::VectorXd eval_g(const Vec8& q, ConstraintMode mode);

/// Rows are the gradients of g_i.
Eigen::MatrixXd eval_g_jacobian(const Vec8& q, ConstraintMode mode);

/// Hessian of the i-th constraint (constant, since all constraints are quadratic).
Mat8 constraint_hessian(int i);

/// Unit-multiplier quadratic forms: q^T basis(i) q reproduces the quadratic part of
/// lambda_i g_i(q) for lambda_i = 1, i.e. -||q_{1..4}||^2, g2, g3, g4.
Mat8 multiplier_basis(int i);

/// P(lambda) = P_par(l1) + P_cross(l2) [+ P_r(l3) + P_t(l4)].
Mat8 multiplier_matrices(const Multipliers& lambda);

/// Z(lambda) = Q + P(lambda).
Mat8 assemble_Z(const Mat8& Q, const Multipliers& lambda);

/// Coordinates that remain after substituting q2 = q3 = 0 (0-based: 0, 3, 4, 5, 6, 7).
inline constexpr int kPlanarReduced[6] = {0, 3, 4, 5, 6, 7};

}  // namespace dqcalib
