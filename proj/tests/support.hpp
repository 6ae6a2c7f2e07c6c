#pragma once

#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "dqcalib/dualquat.hpp"

namespace dqcalib::test {

inline Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Quat::from_vec(Vec4(g(rng), g(rng), g(rng), g(rng)).normalized());
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng), g(rng)};
}

inline DualQuat random_pose(std::mt19937_64& rng, double scale = 5.0) {
  return DualQuat::from_rotation_translation(random_rotation(rng), random_vec(rng, scale));
}

// Reference rotation from Eigen's own quaternion (scalar-first input order).
inline Mat3 eigen_rotation(const Quat& q) { return Eigen::Quaterniond(q.w, q.x, q.y, q.z).toRotationMatrix(); }

inline Mat4 homogeneous(const Mat3& R, const Vec3& t) {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = R;
  T.topRightCorner<3, 1>() = t;
  return T;
}

}  // namespace dqcalib::test
