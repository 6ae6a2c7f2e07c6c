#include "dqcalib/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dqcalib/error.hpp"

namespace dqcalib {

CalibError calib_error(const DualQuat& q_hat, const DualQuat& q_true) {
  if (!q_hat.is_unit(kRepairTol) || !q_true.is_unit(kRepairTol)) {
    throw Error(ErrorCode::NotUnit, "calibration error needs unit dual quaternions");
  }
  const DualQuat e = canonicalize(conjugate(q_true) * q_hat);
  CalibError out;
  // atan2 of the half-angle keeps full precision near zero, unlike acos(w).
  out.eps_r = 2.0 * std::atan2(e.real.vector().norm(), std::clamp(e.real.w, -1.0, 1.0));
  out.eps_t = e.translation().norm();
  return out;
}

}  // namespace dqcalib
