#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dqcalib/cost.hpp"
#include "dqcalib/dualquat.hpp"
#include "dqcalib/trajectory.hpp"

namespace dqcalib {

enum class TrajectoryFormat { tum, kitti_pose };

/// "tum" or "kitti" / "kitti_pose"; InvalidArgument otherwise.
TrajectoryFormat parse_trajectory_format(std::string_view name);

/// TUM: "t tx ty tz qx qy qz qw" per line ('#' comments allowed).
/// KITTI: 12 floats per line (row-major 3x4), timestamps i / rate_hz.
/// Throws ParseError (with line number), NonOrthogonalRotation, NonMonotonicTime.
Trajectory read_trajectory(std::istream& in, TrajectoryFormat format, double kitti_rate_hz = 10.0);
Trajectory load_trajectory(const std::filesystem::path& path, TrajectoryFormat format, double kitti_rate_hz = 10.0);

void write_trajectory(std::ostream& out, const Trajectory& traj, TrajectoryFormat format);
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, TrajectoryFormat format);

struct TimedMotion {
  double t = 0.0;  // end of the interval
  DualQuat motion;
};

/// motion_i = pose_i^-1 * pose_{i+1}, so pose_{i+1} = pose_i * motion_i.
std::vector<TimedMotion> relative_motions(const Trajectory& traj);

/// Screw-linear interpolation a * (a^-1 b)^tau along the shorter screw.
/// tau = 0 and tau = 1 return a and b exactly.
DualQuat sclerp(const DualQuat& a, const DualQuat& b, double tau);

/// Pose at time t: ScLERP between the bracketing samples, or the nearest sample.
/// `skew` receives the distance from t to the time actually represented.
DualQuat pose_at(const Trajectory& traj, double t, bool interpolate, double* skew = nullptr);

struct PairingConfig {
  double max_skew = 0.02;  // seconds
  bool interpolate = true;
};

struct PairingResult {
  std::vector<MotionPair> pairs;
  std::size_t dropped = 0;
};

/// Motion pairs on the time grid of stream a. Sensor b's motion over each
/// interval of a comes from its poses at the interval ends (ScLERP or nearest
/// sample); intervals whose residual skew exceeds max_skew are dropped.
/// Throws NoOverlap for disjoint time ranges.
PairingResult pair_streams(const Trajectory& a, const Trajectory& b, const PairingConfig& cfg = {});

/// One JSON object per line: {"t", "qa": [8], "qb": [8], "w"?: [8], "eta"?}.
/// Numbers carry 17 significant digits.
void write_pairs(std::ostream& out, const std::vector<MotionPair>& pairs);
void save_pairs(const std::filesystem::path& path, const std::vector<MotionPair>& pairs);

/// Validates unit-ness within 1e-6 (NotUnit with the line number), repairs and
/// canonicalizes. Blank lines are skipped.
std::vector<MotionPair> read_pairs(std::istream& in);
std::vector<MotionPair> load_pairs(const std::filesystem::path& path);

/// Whitespace-separated "x y z" lines; '#' comments allowed.
std::vector<Vec3> read_points(std::istream& in);
std::vector<Vec3> load_points(const std::filesystem::path& path);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace dqcalib
