#include "dqcalib/constraints.hpp"

#include "dqcalib/error.hpp"

namespace dqcalib {

int constraint_count(ConstraintMode mode) { return mode == ConstraintMode::planar ? 4 : 2; }

const char* to_string(ConstraintMode mode) { return mode == ConstraintMode::planar ? "planar" : "3d"; }

Multipliers Multipliers::zero(ConstraintMode mode) {
  return {Eigen::VectorXd::Zero(constraint_count(mode))};
}

Multipliers make_multipliers(ConstraintMode mode, std::initializer_list<double> values) {
  if (static_cast<int>(values.size()) != constraint_count(mode)) {
    throw Error(ErrorCode::InvalidArgument, "multiplier count does not match constraint mode");
  }
  Multipliers m = Multipliers::zero(mode);
  int i = 0;
  for (double v : values) m.values[i++] = v;
  return m;
}

Eigen::VectorXd eval_g(const Vec8& q, ConstraintMode mode) {
  Eigen::VectorXd g(constraint_count(mode));
  g[0] = 1.0 - q.head<4>().squaredNorm();
  g[1] = 2.0 * q.head<4>().dot(q.tail<4>());
  if (mode == ConstraintMode::planar) {
    g[2] = q[1] * q[1] + q[2] * q[2];
    g[3] = q[0] * q[7] - q[3] * q[4];
  }
  return g;
}

Eigen::MatrixXd eval_g_jacobian(const Vec8& q, ConstraintMode mode) {
  const int m = constraint_count(mode);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, 8);
  J.block<1, 4>(0, 0) = -2.0 * q.head<4>().transpose();
  J.block<1, 4>(1, 0) = 2.0 * q.tail<4>().transpose();
  J.block<1, 4>(1, 4) = 2.0 * q.head<4>().transpose();
  if (mode == ConstraintMode::planar) {
    J(2, 1) = 2.0 * q[1];
    J(2, 2) = 2.0 * q[2];
    J(3, 0) = q[7];
    J(3, 7) = q[0];
    J(3, 3) = -q[4];
    J(3, 4) = -q[3];
  }
  return J;
}

Mat8 multiplier_basis(int i) {
  Mat8 P = Mat8::Zero();
  switch (i) {
    case 0:
      P.topLeftCorner<4, 4>() = -Eigen::Matrix4d::Identity();
      break;
    case 1:
      P.topRightCorner<4, 4>() = Eigen::Matrix4d::Identity();
      P.bottomLeftCorner<4, 4>() = Eigen::Matrix4d::Identity();
      break;
    case 2:
      P(1, 1) = 1.0;
      P(2, 2) = 1.0;
      break;
    case 3:
      P(0, 7) = P(7, 0) = 0.5;
      P(3, 4) = P(4, 3) = -0.5;
      break;
    default:
      throw Error(ErrorCode::InvalidArgument, "constraint index out of range");
  }
  return P;
}

Mat8 constraint_hessian(int i) {
  // g1 = 1 - ||r||^2 has Hessian -2 I on the real block; the others are pure quadratic forms.
  return 2.0 * multiplier_basis(i);
}

Mat8 multiplier_matrices(const Multipliers& lambda) {
  Mat8 P = Mat8::Zero();
  for (int i = 0; i < lambda.values.size(); ++i) P += lambda.values[i] * multiplier_basis(i);
  return P;
}

Mat8 assemble_Z(const Mat8& Q, const Multipliers& lambda) {
  return Q + multiplier_matrices(lambda);
}

}  // namespace dqcalib
