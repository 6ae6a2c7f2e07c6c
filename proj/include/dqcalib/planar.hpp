#pragma once

#include <cstdint>
#include <span>

#include "dqcalib/dualquat.hpp"

namespace dqcalib {

/// Plane {x : normal . x + distance = 0} in a sensor frame. With distance >= 0
/// the normal points toward the side containing the sensor origin, so a sensor
/// mounted h meters above the ground sees (e_z, h) when its z axis points up.
struct GroundPlane {
  Vec3 normal = Vec3::UnitZ();
  double distance = 0.0;
};

/// Validates |normal| = 1 within 1e-9 (InvalidArgument otherwise).
GroundPlane make_ground_plane(const Vec3& normal, double distance);

/// Displacement that maps the plane onto the xy-plane: rotation by
/// acos(normal . e_z) about normal x e_z (normalized), then translation
/// distance * e_z. A normal parallel to e_z uses the identity rotation, an
/// antiparallel one a half turn about e_x.
DualQuat plane_alignment_dq(const GroundPlane& plane);

/// Sensor motion expressed in the plane-aligned frame: q_G q q_G^-1.
DualQuat project_motion(const DualQuat& q, const DualQuat& q_G);

/// Calibration in the plane-aligned frames: q_Ga q_T q_Gb^-1.
DualQuat project_calibration(const DualQuat& q_T, const DualQuat& q_Ga, const DualQuat& q_Gb);

/// Inverse of project_calibration: q_Ga^-1 q_Tp q_Gb, canonical sign.
DualQuat lift_calibration(const DualQuat& q_Tp, const DualQuat& q_Ga, const DualQuat& q_Gb);

/// Alignment displacements of both sensors.
struct PlaneAlignment {
  DualQuat a = DualQuat::identity();
  DualQuat b = DualQuat::identity();

  static PlaneAlignment from_planes(const GroundPlane& plane_a, const GroundPlane& plane_b);
};

struct RansacOptions {
  int iterations = 200;
  double inlier_threshold = 0.05;  // meters
  std::uint64_t seed = 0;
};

/// RANSAC plane fit followed by a least-squares refit over the inliers.
/// Throws DegenerateInput for fewer than three points or when every sample is collinear.
GroundPlane fit_ground_plane(std::span<const Vec3> points, const RansacOptions& opts);

}  // namespace dqcalib
