#include "dqcalib/verify.hpp"

#include <cmath>
#include <limits>

#include "dqcalib/error.hpp"
#include "eigen_utils.hpp"

namespace dqcalib {

Certificate certify(const Mat8& Q_in, const Vec8& q, ConstraintMode mode, const CertifyOptions& opts) {
  if (!q.allFinite() || eval_g(q, mode).cwiseAbs().maxCoeff() > 1e-6) {
    throw Error(ErrorCode::InfeasiblePoint, "candidate violates the unit dual-quaternion constraints");
  }
  const Mat8 Q = 0.5 * (Q_in + Q_in.transpose());
  const std::vector<int> kept = detail::kept_coordinates(mode);
  const std::vector<int> act = detail::active_multipliers(mode);
  const detail::VecX qr = detail::restrict(q, kept);
  const int m = static_cast<int>(act.size());

  // Z(lambda) q is linear in lambda: column j is basis_j q.
  Eigen::MatrixXd A(qr.size(), m);
  for (int j = 0; j < m; ++j) A.col(j) = detail::restrict(multiplier_basis(act[j]), kept) * qr;
  const Eigen::VectorXd b = -(detail::restrict(Q, kept) * qr);
  const Eigen::MatrixXd AtA = A.transpose() * A + 1e-14 * Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd fit = AtA.ldlt().solve(A.transpose() * b);

  Certificate c;
  c.lambda_fit = Multipliers::zero(mode);
  for (int j = 0; j < m; ++j) c.lambda_fit[act[j]] = fit[j];
  if (mode == ConstraintMode::planar) c.lambda_fit[2] = std::numeric_limits<double>::infinity();

  Mat8 Z = Q;
  for (int j = 0; j < m; ++j) Z += fit[j] * multiplier_basis(act[j]);
  const detail::MatX Zr = detail::restrict(Z, kept);

  const double scale = 1.0 + Q.trace();
  c.residual = (Zr * qr).norm();
  c.min_eig = detail::min_eigenvalue(Zr);
  c.cost = q.dot(Q * q);
  c.gap = c.cost - fit[0];
  c.indefinite = c.min_eig < -opts.tol_psd * scale;
  c.is_global = !c.indefinite && c.residual < opts.tol_residual * scale && std::abs(c.gap) < opts.gap_threshold;
  return c;
}

}  // namespace dqcalib
