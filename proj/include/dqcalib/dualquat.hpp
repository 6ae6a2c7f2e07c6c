#pragma once

#include <Eigen/Core>

namespace dqcalib {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Tolerance of the unit-DQ predicate.
inline constexpr double kUnitTol = 1e-9;
/// Inputs within this distance of the unit manifold are repaired instead of rejected.
inline constexpr double kRepairTol = 1e-6;

/// Quaternion in scalar-first order (w, x, y, z).
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static Quat zero() { return {0.0, 0.0, 0.0, 0.0}; }
  static Quat pure(const Vec3& v) { return {0.0, v.x(), v.y(), v.z()}; }
  static Quat from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

  Vec4 vec() const { return {w, x, y, z}; }
  Vec3 vector() const { return {x, y, z}; }

  Quat conjugate() const { return {w, -x, -y, -z}; }
  double squared_norm() const { return w * w + x * x + y * y + z * z; }
  double norm() const;

  /// 4x4 matrices such that vec(p*q) = p.left_mat() * vec(q) = q.right_mat() * vec(p).
  Mat4 left_mat() const;
  Mat4 right_mat() const;

  /// Rotation matrix of a unit quaternion.
  Mat3 rotation_matrix() const;

  Quat operator-() const { return {-w, -x, -y, -z}; }
  friend Quat operator+(const Quat& a, const Quat& b) { return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Quat operator-(const Quat& a, const Quat& b) { return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Quat operator*(double s, const Quat& q) { return {s * q.w, s * q.x, s * q.y, s * q.z}; }
  friend bool operator==(const Quat&, const Quat&) = default;
};

/// Hamilton product.
Quat quat_mul(const Quat& p, const Quat& q);
inline Quat operator*(const Quat& p, const Quat& q) { return quat_mul(p, q); }

/// Dual quaternion q = real + eps * dual.
///
/// Unit dual quaternions represent rigid displacements x -> R x + t with
/// real = r and dual = 0.5 * t * r. Composition follows the homogeneous-matrix
/// product: matrix(p * q) = matrix(p) * matrix(q), so "apply a, then b" is b * a.
struct DualQuat {
  Quat real = Quat::identity();
  Quat dual = Quat::zero();

  static DualQuat identity() { return {}; }
  static DualQuat from_vec(const Vec8& v);
  /// Displacement x -> R(r) x + t for a unit rotation quaternion r.
  static DualQuat from_rotation_translation(const Quat& r, const Vec3& t);
  /// Rigid 4x4 homogeneous matrix; the rotation block must be orthonormal.
  static DualQuat from_matrix(const Mat4& T);

  /// Concatenation (real, dual), each in (w, x, y, z) order.
  Vec8 vec() const;

  /// ||real||^2 = 1 and real.dual* + dual.real* = 0 within tol.
  bool is_unit(double tol = kUnitTol) const;

  /// t = 2 dual real* (vector part).
  Vec3 translation() const;
  Mat3 rotation_matrix() const { return real.rotation_matrix(); }
  Mat4 to_matrix() const;

  DualQuat operator-() const { return {-real, -dual}; }
  friend bool operator==(const DualQuat&, const DualQuat&) = default;
};

DualQuat dq_mul(const DualQuat& p, const DualQuat& q);
inline DualQuat operator*(const DualQuat& p, const DualQuat& q) { return dq_mul(p, q); }

/// (real*, dual*). For unit q this is the inverse displacement.
DualQuat conjugate(const DualQuat& q);

/// Sign representative with positive real scalar. When the real scalar is zero
/// (|w| <= 1e-12) the first nonzero component of vec(q) is made positive.
DualQuat canonicalize(const DualQuat& q);

/// Projects a near-unit DQ onto the unit manifold: normalizes the real part and
/// removes the dual component along it. Throws NotUnit if q is farther than tol.
DualQuat make_unit(const DualQuat& q, double tol = kRepairTol);

/// Builds the canonical unit DQ for a rotation of `angle` about `axis` followed by
/// translation t. Throws NonUnitAxis if |axis| deviates from 1 by more than 1e-9
/// while angle != 0.
DualQuat from_rot_trans(const Vec3& axis, double angle, const Vec3& t);

struct RotTrans {
  Vec3 axis;
  double angle;  // [0, pi]
  Vec3 translation;
};

/// Inverse of from_rot_trans. Identity rotation reports axis (1, 0, 0).
RotTrans to_rot_trans(const DualQuat& q);

/// R v + t, evaluated as q (1 + eps v) qbar with qbar = real* - eps dual*.
Vec3 transform_point(const DualQuat& q, const Vec3& v);

/// 8x8 matrices with vec(p*q) = left_mat(p) vec(q) = right_mat(q) vec(p).
Mat8 left_mat(const DualQuat& p);
Mat8 right_mat(const DualQuat& q);

}  // namespace dqcalib
