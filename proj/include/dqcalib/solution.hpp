#pragma once

#include <optional>

#include "dqcalib/constraints.hpp"
#include "dqcalib/dualquat.hpp"

namespace dqcalib {

enum class Provenance { local, global };

const char* to_string(Provenance p);

/// Result of a calibration solve.
///
/// In planar mode q_hat is the lifted 3D calibration and q_hat_planar the
/// estimate in the plane-aligned frames; lambda[2] is +inf there because the
/// q2 = q3 = 0 substitution replaces the q2^2 + q3^2 multiplier.
struct CalibSolution {
  DualQuat q_hat;
  std::optional<DualQuat> q_hat_planar;
  Multipliers lambda;
  double primal_cost = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  bool is_global = false;
  Provenance provenance = Provenance::global;
  double solve_time = 0.0;  // seconds
  int null_dim = 0;
  /// The global solver could not isolate a unique calibration (unobservable data).
  bool degenerate = false;
  /// z, roll and pitch were taken from the ground planes rather than estimated.
  bool plane_derived = false;
};

}  // namespace dqcalib
