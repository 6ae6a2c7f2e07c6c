#pragma once

#include <string>
#include <vector>

#include "dqcalib/dualquat.hpp"

namespace dqcalib {

struct TimedPose {
  double t = 0.0;
  DualQuat pose;
};

/// Absolute poses of one sensor, strictly increasing in time. A pose maps
/// sensor coordinates into the trajectory's world frame.
struct Trajectory {
  std::string sensor_id;
  std::vector<TimedPose> poses;
};

}  // namespace dqcalib
