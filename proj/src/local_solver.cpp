#include "dqcalib/local_solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "dqcalib/error.hpp"

namespace dqcalib {

namespace {

using JacT = Eigen::Matrix<double, 8, Eigen::Dynamic, 0, 8, 5>;
using VecM = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 5, 1>;

// Constraint set used by the local solver. Planar mode swaps the degenerate
// q2^2 + q3^2 = 0 for the equivalent linear pair q2 = 0, q3 = 0.
int local_count(ConstraintMode mode) { return mode == ConstraintMode::planar ? 5 : 2; }

VecM local_g(const Vec8& q, ConstraintMode mode) {
  VecM g(local_count(mode));
  g[0] = 1.0 - q.head<4>().squaredNorm();
  g[1] = 2.0 * q.head<4>().dot(q.tail<4>());
  if (mode == ConstraintMode::planar) {
    g[2] = q[1];
    g[3] = q[2];
    g[4] = q[0] * q[7] - q[3] * q[4];
  }
  return g;
}

// Columns are constraint gradients.
JacT local_jacobian_t(const Vec8& q, ConstraintMode mode) {
  JacT Jt = JacT::Zero(8, local_count(mode));
  Jt.col(0).head<4>() = -2.0 * q.head<4>();
  Jt.col(1).head<4>() = 2.0 * q.tail<4>();
  Jt.col(1).tail<4>() = 2.0 * q.head<4>();
  if (mode == ConstraintMode::planar) {
    Jt(1, 2) = 1.0;
    Jt(2, 3) = 1.0;
    Jt(0, 4) = q[7];
    Jt(7, 4) = q[0];
    Jt(3, 4) = -q[4];
    Jt(4, 4) = -q[3];
  }
  return Jt;
}

Mat8 lagrangian_hessian(const Mat8& Q, const VecM& lambda, ConstraintMode mode) {
  Mat8 H = 2.0 * Q + lambda[0] * constraint_hessian(0) + lambda[1] * constraint_hessian(1);
  if (mode == ConstraintMode::planar) H += lambda[4] * constraint_hessian(3);
  return H;
}

struct Kkt {
  VecM lambda;
  double residual;
};

Kkt kkt_state(const Mat8& Q, const Vec8& q, ConstraintMode mode) {
  const JacT Jt = local_jacobian_t(q, mode);
  const Vec8 grad = 2.0 * Q * q;
  Eigen::ColPivHouseholderQR<JacT> qr(Jt);
  VecM lambda = qr.solve(Vec8(-grad));
  const Vec8 stat = grad + Jt * lambda;
  const double res = std::max(stat.cwiseAbs().maxCoeff(), local_g(q, mode).cwiseAbs().maxCoeff());
  return {lambda, res};
}

Multipliers to_multipliers(const VecM& lambda, ConstraintMode mode) {
  if (mode == ConstraintMode::planar) {
    return make_multipliers(mode, {lambda[0], lambda[1], std::numeric_limits<double>::infinity(), lambda[4]});
  }
  return make_multipliers(mode, {lambda[0], lambda[1]});
}

}  // namespace

Vec8 project_to_constraints(const Vec8& q, ConstraintMode mode) {
  Vec4 r = q.head<4>();
  Vec4 d = q.tail<4>();
  if (mode == ConstraintMode::planar) {
    r[1] = 0.0;
    r[2] = 0.0;
  }
  const double n = r.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(ErrorCode::DegenerateInit, "real part vanishes; cannot project onto the constraint set");
  }
  r /= n;
  d /= n;
  d -= r.dot(d) * r;
  if (mode == ConstraintMode::planar) {
    // r = (c, 0, 0, s); g4 = <(-s, 0, 0, c), d>
    const Vec4 w(-r[3], 0.0, 0.0, r[0]);
    d -= w.dot(d) * w;
  }
  Vec8 out;
  out << r, d;
  return canonicalize(DualQuat::from_vec(out)).vec();
}

LocalSolution solve_local(const Mat8& Q, ConstraintMode mode, const LocalSolveOptions& opts) {
  if (!(opts.tol_kkt > 0.0) || !(opts.tol_step > 0.0) || opts.max_iter < 0) {
    throw Error(ErrorCode::InvalidArgument, "local solver tolerances must be positive");
  }
  const Vec8 init = opts.init.value_or(DualQuat::identity().vec());
  if (!(init.head<4>().norm() > 0.0)) {
    throw Error(ErrorCode::DegenerateInit, "initial point has zero real part");
  }

  const int m = local_count(mode);
  const double q_scale = 1.0 + Q.cwiseAbs().maxCoeff();

  LocalSolution out;
  Vec8 q = project_to_constraints(init, mode);
  Kkt kkt = kkt_state(Q, q, mode);

  int it = 0;
  bool converged = kkt.residual < opts.tol_kkt;
  while (!converged && it < opts.max_iter) {
    const JacT Jt = local_jacobian_t(q, mode);
    Eigen::HouseholderQR<JacT> qr(Jt);
    const Mat8 basis = qr.householderQ();
    const Eigen::MatrixXd T = basis.rightCols(8 - m);

    const Vec8 grad = 2.0 * Q * q;
    const Eigen::VectorXd gr = T.transpose() * grad;
    const Eigen::MatrixXd Hr = T.transpose() * lagrangian_hessian(Q, kkt.lambda, mode) * T;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Hr + Hr.transpose()));
    Eigen::VectorXd mu = es.eigenvalues().cwiseAbs();
    const double floor = 1e-10 * (1.0 + mu.maxCoeff());
    for (int i = 0; i < mu.size(); ++i) mu[i] = std::max(mu[i], floor);
    const Eigen::VectorXd pr = -es.eigenvectors() * (es.eigenvectors().transpose() * gr).cwiseQuotient(mu);
    const Vec8 p = T * pr;

    const double f0 = q.dot(Q * q);
    const double slope = grad.dot(p);
    const bool near_solution = gr.cwiseAbs().maxCoeff() < 1e-6 * q_scale;

    double alpha = 1.0;
    bool accepted = false;
    Vec8 cand;
    for (int ls = 0; ls < 60; ++ls) {
      cand = project_to_constraints(q + alpha * p, mode);
      const double f = cand.dot(Q * cand);
      if (f <= f0 + 1e-4 * alpha * slope || (near_solution && alpha == 1.0 && f <= f0 + 1e-14 * (1.0 + std::abs(f0)))) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++it;
    if (!accepted) break;

    const double step = (cand - q).cwiseAbs().maxCoeff();
    q = cand;
    kkt = kkt_state(Q, q, mode);
    converged = kkt.residual < opts.tol_kkt || step < opts.tol_step;
  }

  out.q_hat = q;
  out.lambda = to_multipliers(kkt.lambda, mode);
  if (mode == ConstraintMode::planar) out.linear_multipliers = {kkt.lambda[2], kkt.lambda[3]};
  out.cost = q.dot(Q * q);
  out.kkt_residual = kkt.residual;
  out.iterations = it;
  out.converged = converged;
  return out;
}

}  // namespace dqcalib
