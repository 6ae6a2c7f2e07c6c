#include "dqcalib/planar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dqcalib/error.hpp"

namespace dqcalib {

namespace {

void require_unit(const DualQuat& q, const char* what) {
  if (!q.is_unit()) throw Error(ErrorCode::NotUnit, what);
}

// Orients (n, d) so that d >= 0; a plane through the origin keeps n_z >= 0.
GroundPlane oriented(Vec3 n, double d) {
  bool flip = d < 0.0;
  if (d == 0.0) {
    for (int i = 2; i >= 0; --i) {
      if (n[i] != 0.0) {
        flip = n[i] < 0.0;
        break;
      }
    }
  }
  if (flip) {
    n = -n;
    d = -d;
  }
  return {n, d};
}

GroundPlane least_squares_plane(std::span<const Vec3> points, const std::vector<std::size_t>& idx) {
  Vec3 centroid = Vec3::Zero();
  for (auto i : idx) centroid += points[i];
  centroid /= static_cast<double>(idx.size());
  Mat3 cov = Mat3::Zero();
  for (auto i : idx) {
    const Vec3 d = points[i] - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 n = es.eigenvectors().col(0).normalized();
  return oriented(n, -n.dot(centroid));
}

}  // namespace

GroundPlane make_ground_plane(const Vec3& normal, double distance) {
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "ground plane normal must be unit length");
  }
  return {normal, distance};
}

DualQuat plane_alignment_dq(const GroundPlane& plane) {
  const Vec3 ez = Vec3::UnitZ();
  const Vec3 axis = plane.normal.cross(ez);
  const double s = axis.norm();
  const Vec3 t = plane.distance * ez;
  if (s < 1e-9) {
    if (plane.normal.z() > 0.0) return from_rot_trans(Vec3::UnitX(), 0.0, t);
    return from_rot_trans(Vec3::UnitX(), std::numbers::pi, t);
  }
  const double angle = std::acos(std::clamp(plane.normal.dot(ez), -1.0, 1.0));
  return from_rot_trans(axis / s, angle, t);
}

DualQuat project_motion(const DualQuat& q, const DualQuat& q_G) {
  require_unit(q, "project_motion: motion is not unit");
  require_unit(q_G, "project_motion: alignment is not unit");
  return canonicalize(q_G * q * conjugate(q_G));
}

DualQuat project_calibration(const DualQuat& q_T, const DualQuat& q_Ga, const DualQuat& q_Gb) {
  require_unit(q_T, "project_calibration: calibration is not unit");
  return canonicalize(q_Ga * q_T * conjugate(q_Gb));
}

DualQuat lift_calibration(const DualQuat& q_Tp, const DualQuat& q_Ga, const DualQuat& q_Gb) {
  require_unit(q_Tp, "lift_calibration: planar calibration is not unit");
  require_unit(q_Ga, "lift_calibration: alignment a is not unit");
  require_unit(q_Gb, "lift_calibration: alignment b is not unit");
  return canonicalize(conjugate(q_Ga) * q_Tp * q_Gb);
}

PlaneAlignment PlaneAlignment::from_planes(const GroundPlane& plane_a, const GroundPlane& plane_b) {
  return {plane_alignment_dq(plane_a), plane_alignment_dq(plane_b)};
}

GroundPlane fit_ground_plane(std::span<const Vec3> points, const RansacOptions& opts) {
  const std::size_t n = points.size();
  if (n < 3) throw Error(ErrorCode::DegenerateInput, "plane fit needs at least three points");

  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double collinear_tol = 1e-12 * std::max(1.0, scale * scale);

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  std::vector<std::size_t> best_inliers;
  std::vector<std::size_t> inliers;
  const int iterations = n == 3 ? 1 : std::max(1, opts.iterations);
  for (int it = 0; it < iterations; ++it) {
    std::size_t i0 = 0, i1 = 1, i2 = 2;
    if (n > 3) {
      i0 = pick(rng);
      do { i1 = pick(rng); } while (i1 == i0);
      do { i2 = pick(rng); } while (i2 == i0 || i2 == i1);
    }
    const Vec3 cross = (points[i1] - points[i0]).cross(points[i2] - points[i0]);
    const double len = cross.norm();
    if (len <= collinear_tol) continue;
    const Vec3 normal = cross / len;
    const double d = -normal.dot(points[i0]);
    inliers.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(normal.dot(points[k]) + d) <= opts.inlier_threshold) inliers.push_back(k);
    }
    if (inliers.size() > best_inliers.size()) best_inliers.swap(inliers);
  }
  if (best_inliers.size() < 3) {
    throw Error(ErrorCode::DegenerateInput, "every RANSAC sample was collinear");
  }
  return least_squares_plane(points, best_inliers);
}

}  // namespace dqcalib
