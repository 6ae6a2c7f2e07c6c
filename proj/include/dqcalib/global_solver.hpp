#pragma once

#include <Eigen/Core>

#include "dqcalib/constraints.hpp"
#include "dqcalib/cost.hpp"
#include "dqcalib/dualquat.hpp"
#include "dqcalib/solution.hpp"

namespace dqcalib {

struct DualSolveOptions {
  double tol_psd = 1e-9;    // min-eigenvalue slack, relative to 1 + trace(Q)
  double tol_obj = 1e-10;   // bracketing width on lambda1 and the free multipliers
  int max_outer = 200;      // iteration cap of each bracketing loop
  double null_tol = 1e-7;   // relative eigenvalue threshold for null-space membership
};

struct GlobalOptions {
  DualSolveOptions dual;
  double gap_threshold = 1e-6;
  /// Refine the recovered calibration with the local solver (kept only if the
  /// cost does not increase). The null vector inherits the dual solver's
  /// tolerance; a few Newton steps bring it to full precision.
  bool polish = true;
};

/// Maximizes lambda1 subject to Z(lambda) >= 0.
///
/// lambda1 is a concave function of the remaining multipliers, h(mu) =
/// max{l1 : Z(l1, mu) >= 0}; it is evaluated by a safeguarded Newton root search
/// on the concave map l1 -> lambda_min(Z), and maximized over mu by golden-section
/// search (nested for the two free multipliers of planar mode). In planar mode the
/// q2^2 + q3^2 constraint is handled by substituting q2 = q3 = 0, which is the
/// lambda3 -> +inf limit of its multiplier; lambda[2] is reported as +inf.
Multipliers solve_dual(const Mat8& Q, ConstraintMode mode, const DualSolveOptions& opts = {});

/// Z(lambda) restricted to the coordinates the dual problem works on
/// (all eight, or the six left by q2 = q3 = 0 in planar mode).
Eigen::MatrixXd reduced_Z(const Mat8& Q, const Multipliers& lambda);

struct PrimalRecovery {
  Vec8 q_hat = Vec8::Zero();
  int null_dim = 0;
};

/// Recovers the calibration from the null space of Z(lambda).
///
/// q_hat = v / |v_{1..4}| for a null vector v, projected onto the constraint set.
/// Null spaces larger than one are expected: noise-free data always adds the
/// direction (0, r) (and (0, r e_z) in planar mode), which the projection removes.
/// Any other near-null direction means the data does not determine the
/// calibration and raises NonUniqueSolutionError carrying the null basis.
/// Throws NoNullSpace when Z(lambda) has no eigenvalue below the null threshold;
/// null_dim counts eigenvalues below null_tol * max(1, lambda_max).
PrimalRecovery recover_primal(const Mat8& Q, const Multipliers& lambda, const DualSolveOptions& opts = {});

struct DualSolution {
  Multipliers lambda;
  double dual_value = 0.0;
  double min_eig = 0.0;
  Vec8 q_hat = Vec8::Zero();
  double primal_cost = 0.0;
  int null_dim = 0;
};

/// solve_dual followed by recover_primal.
DualSolution solve_dual_problem(const Mat8& Q, ConstraintMode mode, const DualSolveOptions& opts = {});

/// Global calibration from an accumulator (lifted to 3D when it carries planes).
/// Throws EmptyData for an empty accumulator.
CalibSolution solve_global(const CostAccumulator& acc, const GlobalOptions& opts = {});

}  // namespace dqcalib
