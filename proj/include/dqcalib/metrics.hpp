#pragma once

#include "dqcalib/dualquat.hpp"

namespace dqcalib {

struct CalibError {
  double eps_r = 0.0;  // radians, in [0, pi]
  double eps_t = 0.0;  // meters
};

/// Rotation angle and translation length of q_true^-1 * q_hat. Throws NotUnit.
CalibError calib_error(const DualQuat& q_hat, const DualQuat& q_true);

}  // namespace dqcalib
