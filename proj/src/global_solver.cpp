#include "dqcalib/global_solver.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "dqcalib/error.hpp"
#include "dqcalib/local_solver.hpp"
#include "dqcalib/planar.hpp"
#include "eigen_utils.hpp"

namespace dqcalib {

namespace {

using detail::MatX;
using detail::VecX;

constexpr double kGolden = 0.6180339887498949;

// Everything the inner evaluation needs for one problem instance.
struct DualProblem {
  Mat8 Q;
  ConstraintMode mode;
  std::vector<int> kept;
  MatX E;            // restricted multiplier basis of lambda1 (-I on the real coordinates)
  MatX B2;           // lambda2 basis
  MatX B4;           // lambda4 basis (planar only)
  VecX real_mask;    // 1 on kept coordinates that belong to the real part
  double upper = 0;  // weak-duality bound on lambda1
  double slack = 0;  // accepted negative eigenvalue
  DualSolveOptions opts;

  MatX M(double l2, double l4) const {
    MatX m = detail::restrict(Q, kept) + l2 * B2;
    if (mode == ConstraintMode::planar) m += l4 * B4;
    return m;
  }
};

DualProblem make_problem(const Mat8& Q, ConstraintMode mode, const DualSolveOptions& opts) {
  DualProblem p;
  p.Q = 0.5 * (Q + Q.transpose());
  p.mode = mode;
  p.kept = detail::kept_coordinates(mode);
  p.E = detail::restrict(multiplier_basis(0), p.kept);
  p.B2 = detail::restrict(multiplier_basis(1), p.kept);
  p.B4 = detail::restrict(multiplier_basis(3), p.kept);
  p.real_mask = VecX::Zero(static_cast<int>(p.kept.size()));
  for (int i = 0; i < p.real_mask.size(); ++i) p.real_mask[i] = p.kept[i] < 4 ? 1.0 : 0.0;
  p.slack = 1e-14 * (1.0 + p.Q.cwiseAbs().maxCoeff());
  // The identity DQ is feasible in both modes; its cost bounds every dual value.
  p.upper = p.Q(0, 0) * (1.0 + 1e-12) + p.slack;
  p.opts = opts;
  return p;
}

// Largest lambda1 in [0, upper] with lambda_min(M + lambda1 E) >= -slack. If no
// lambda1 >= 0 qualifies, returns lambda_min(M) (negative), which keeps the map
// mu -> value unimodal along lines through the feasible set.
double max_lambda1(const DualProblem& p, const MatX& M) {
  Eigen::SelfAdjointEigenSolver<MatX> es;
  const double target = -0.5 * p.slack;
  auto eval = [&](double l1, double& slope) {
    es.compute(M + l1 * p.E);
    const VecX v = es.eigenvectors().col(0);
    slope = -v.cwiseProduct(p.real_mask).squaredNorm();
    return es.eigenvalues()[0];
  };

  double slope = 0.0;
  const double g0 = eval(0.0, slope);
  if (g0 < -p.slack) return g0;
  if (g0 < target) return 0.0;

  double lo = 0.0;
  double hi = p.upper;
  double x = hi;
  for (int it = 0; it < 2 * p.opts.max_outer; ++it) {
    const double g = eval(x, slope);
    if (g >= target) {
      lo = x;
      if (x == p.upper) return x;
    } else if (g >= -p.slack) {
      return x;
    } else {
      hi = x;
    }
    if (hi - lo <= p.opts.tol_obj * 1e-3 * (1.0 + std::abs(hi))) break;

    double next = 0.5 * (lo + hi);
    if (g < target && slope < -1e-12) {
      // Concavity keeps the Newton iterate to the right of the root.
      const double newton = x + (target - g) / slope;
      if (std::isfinite(newton) && newton > lo && newton < hi && (hi - newton) > 1e-3 * (hi - lo)) next = newton;
    }
    x = next;
  }
  return lo;
}

struct Max1D {
  double x;
  double f;
};

// Maximizes a unimodal function: geometric bracket expansion from 0, then golden section.
Max1D maximize_unimodal(const std::function<double(double)>& F, double step, const DualSolveOptions& opts) {
  Max1D best{0.0, F(0.0)};
  auto probe = [&](double x) {
    const double f = F(x);
    if (f > best.f) best = {x, f};
    return f;
  };

  const double fp = probe(step);
  const double fm = probe(-step);
  double lo, hi;
  if (best.x == 0.0) {
    lo = -step;
    hi = step;
  } else {
    const double dir = fp > fm ? 1.0 : -1.0;
    double a = 0.0;
    double b = dir * step;
    double fb = dir > 0 ? fp : fm;
    double c = b + 2.0 * (b - a);
    double fc = probe(c);
    int expansions = 0;
    while (fc > fb) {
      if (++expansions > 200) throw Error(ErrorCode::MaxIterExceeded, "dual objective appears unbounded");
      a = b;
      b = c;
      fb = fc;
      c = b + 2.0 * (b - a);
      fc = probe(c);
    }
    lo = std::min(a, c);
    hi = std::max(a, c);
  }

  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = probe(x1);
  double f2 = probe(x2);
  for (int it = 0; it < opts.max_outer; ++it) {
    if (hi - lo <= opts.tol_obj * (1.0 + std::abs(0.5 * (lo + hi)))) break;
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = probe(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = probe(x2);
    }
  }
  return best;
}

Multipliers assemble(ConstraintMode mode, double l1, double l2, double l4) {
  if (mode == ConstraintMode::planar) {
    return make_multipliers(mode, {l1, l2, std::numeric_limits<double>::infinity(), l4});
  }
  return make_multipliers(mode, {l1, l2});
}

// Z(lambda) on the kept coordinates; lambda3 (possibly +inf) never enters.
MatX reduced_Z_impl(const Mat8& Q, const Multipliers& lambda) {
  const ConstraintMode mode = lambda.mode();
  Mat8 Z = Q;
  for (int j : detail::active_multipliers(mode)) Z += lambda[j] * multiplier_basis(j);
  return detail::restrict(Z, detail::kept_coordinates(mode));
}

}  // namespace

Eigen::MatrixXd reduced_Z(const Mat8& Q, const Multipliers& lambda) { return reduced_Z_impl(Q, lambda); }

Multipliers solve_dual(const Mat8& Q, ConstraintMode mode, const DualSolveOptions& opts) {
  if (!(opts.tol_psd > 0.0) || !(opts.tol_obj > 0.0) || opts.max_outer <= 0 || !(opts.null_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dual solver options must be positive");
  }
  if (!Q.allFinite()) throw Error(ErrorCode::InvalidArgument, "cost matrix has non-finite entries");

  const DualProblem p = make_problem(Q, mode, opts);
  const double step = 1e-2 * (1.0 + p.Q.cwiseAbs().maxCoeff());

  auto over_l2 = [&](double l4) {
    return maximize_unimodal([&](double l2) { return max_lambda1(p, p.M(l2, l4)); }, step, opts);
  };

  double l2 = 0.0;
  double l4 = 0.0;
  double l1 = 0.0;
  if (mode == ConstraintMode::planar) {
    const Max1D outer = maximize_unimodal([&](double x) { return over_l2(x).f; }, step, opts);
    l4 = outer.x;
    const Max1D inner = over_l2(l4);
    l2 = inner.x;
    l1 = inner.f;
  } else {
    const Max1D best = over_l2(0.0);
    l2 = best.x;
    l1 = best.f;
  }

  if (!(l1 >= 0.0)) {
    throw Error(ErrorCode::Infeasible, "no multiplier with a positive semidefinite Z(lambda) was found");
  }
  return assemble(mode, l1, l2, l4);
}

PrimalRecovery recover_primal(const Mat8& Q, const Multipliers& lambda, const DualSolveOptions& opts) {
  const ConstraintMode mode = lambda.mode();
  const std::vector<int> kept = detail::kept_coordinates(mode);
  const MatX Zr = reduced_Z_impl(0.5 * (Q + Q.transpose()), lambda);

  Eigen::SelfAdjointEigenSolver<MatX> es(Zr);
  const VecX& ev = es.eigenvalues();
  const double thresh = opts.null_tol * std::max(1.0, ev[ev.size() - 1]);
  int k = 0;
  while (k < ev.size() && ev[k] < thresh) ++k;
  if (k == 0) {
    throw Error(ErrorCode::NoNullSpace, "Z(lambda) has no null space; the dual problem is not converged");
  }

  Eigen::MatrixXd N(8, k);
  for (int j = 0; j < k; ++j) N.col(j) = detail::embed(es.eigenvectors().col(j), kept);

  // Candidate: the lowest null vector with a substantial rotational part, or the
  // null-space combination with the largest one.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(N.topRows(4), Eigen::ComputeFullV);
  const double sigma = svd.singularValues()[0];
  if (!(sigma > 1e-6)) {
    throw NonUniqueSolutionError(N, "null space of Z(lambda) has no rotational component");
  }
  Vec8 v = N * svd.matrixV().col(0);
  for (int j = 0; j < k; ++j) {
    if (N.col(j).head<4>().norm() >= 0.5 * sigma) {
      v = N.col(j);
      break;
    }
  }
  // Normalizing the real part and projecting removes the components along
  // (0, r) and, in planar mode, (0, r e_z) -- the directions g2 and g4 fix.
  const Vec8 q_hat = project_to_constraints(v / v.head<4>().norm(), mode);

  // Any further near-null direction leaves the calibration undetermined.
  if (k > 1) {
    const Vec4 r = q_hat.head<4>();
    Eigen::MatrixXd fixed(8, mode == ConstraintMode::planar ? 3 : 2);
    fixed.setZero();
    fixed.col(0) = q_hat;
    fixed.col(1).tail<4>() = r;
    if (mode == ConstraintMode::planar) fixed.col(2).tail<4>() << -r[3], 0.0, 0.0, r[0];
    Eigen::MatrixXd Fr(kept.size(), fixed.cols());
    for (int j = 0; j < fixed.cols(); ++j) Fr.col(j) = detail::restrict(Vec8(fixed.col(j)), kept);
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(Fr).householderQ();
    const Eigen::MatrixXd P = basis.rightCols(basis.cols() - Fr.cols());
    const double rest = detail::min_eigenvalue(P.transpose() * Zr * P);
    if (rest < thresh) {
      throw NonUniqueSolutionError(N, "null space of Z(lambda) has dimension " + std::to_string(k) +
                                          " beyond the constraint-fixed directions; the calibration is not observable");
    }
  }

  PrimalRecovery out;
  out.q_hat = q_hat;
  out.null_dim = k;
  return out;
}

DualSolution solve_dual_problem(const Mat8& Q, ConstraintMode mode, const DualSolveOptions& opts) {
  DualSolution out;
  out.lambda = solve_dual(Q, mode, opts);
  out.dual_value = out.lambda[0];
  out.min_eig = detail::min_eigenvalue(reduced_Z_impl(0.5 * (Q + Q.transpose()), out.lambda));
  const PrimalRecovery rec = recover_primal(Q, out.lambda, opts);
  out.q_hat = rec.q_hat;
  out.null_dim = rec.null_dim;
  out.primal_cost = out.q_hat.dot(Q * out.q_hat);
  return out;
}

CalibSolution solve_global(const CostAccumulator& acc, const GlobalOptions& opts) {
  if (acc.count() == 0) throw Error(ErrorCode::EmptyData, "no motion pairs accumulated");
  const auto start = std::chrono::steady_clock::now();

  const Mat8 Q = acc.normalized();
  const DualSolution ds = solve_dual_problem(Q, acc.mode(), opts.dual);

  CalibSolution sol;
  Vec8 q = ds.q_hat;
  double cost = ds.primal_cost;
  if (opts.polish) {
    LocalSolveOptions lopts;
    lopts.init = q;
    lopts.max_iter = 20;
    const LocalSolution ls = solve_local(Q, acc.mode(), lopts);
    if (ls.cost <= cost) {
      q = ls.q_hat;
      cost = ls.cost;
    }
  }
  const DualQuat q_hat = DualQuat::from_vec(q);
  sol.lambda = ds.lambda;
  sol.primal_cost = cost;
  sol.dual_value = ds.dual_value;
  sol.gap = cost - ds.dual_value;
  sol.is_global = sol.gap < opts.gap_threshold;
  sol.provenance = Provenance::global;
  sol.null_dim = ds.null_dim;
  if (acc.mode() == ConstraintMode::planar) {
    sol.q_hat_planar = q_hat;
    if (acc.planes()) {
      sol.q_hat = lift_calibration(q_hat, acc.planes()->a, acc.planes()->b);
      sol.plane_derived = true;
    } else {
      sol.q_hat = q_hat;
    }
  } else {
    sol.q_hat = q_hat;
  }
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace dqcalib
