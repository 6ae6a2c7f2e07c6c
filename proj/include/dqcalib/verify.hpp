#pragma once

#include "dqcalib/constraints.hpp"
#include "dqcalib/dualquat.hpp"

namespace dqcalib {

struct CertifyOptions {
  double tol_psd = 1e-9;        // min eigenvalue >= -tol_psd * (1 + trace Q)
  double tol_residual = 1e-8;   // |Z(lambda) q| < tol_residual * (1 + trace Q)
  double gap_threshold = 1e-6;
};

struct Certificate {
  /// Least-squares multipliers; lambda3 is +inf in planar mode (see solve_dual).
  Multipliers lambda_fit;
  double residual = 0.0;   // |Z(lambda_fit) q|
  double min_eig = 0.0;    // smallest eigenvalue of Z(lambda_fit)
  double cost = 0.0;       // q^T Q q
  double gap = 0.0;        // cost - lambda_fit[0], reported even when Z is indefinite
  bool indefinite = false;
  bool is_global = false;
};

/// Checks whether a feasible candidate is a global minimizer of q^T Q q: fits the
/// multipliers of Z(lambda) q = 0 by least squares, then tests the residual, the
/// positive semidefiniteness of Z and the duality gap. A fitted multiplier is
/// only dual-feasible at a stationary point, so a gap of either sign beyond the
/// threshold disqualifies the candidate.
/// Throws InfeasiblePoint if q violates the constraints of `mode` by more than 1e-6.
Certificate certify(const Mat8& Q, const Vec8& q, ConstraintMode mode, const CertifyOptions& opts = {});

}  // namespace dqcalib
