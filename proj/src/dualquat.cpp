#include "dqcalib/dualquat.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "dqcalib/error.hpp"

namespace dqcalib {

double Quat::norm() const { return std::sqrt(squared_norm()); }

Mat4 Quat::left_mat() const {
  Mat4 m;
  m << w, -x, -y, -z,
       x,  w, -z,  y,
       y,  z,  w, -x,
       z, -y,  x,  w;
  return m;
}

Mat4 Quat::right_mat() const {
  Mat4 m;
  m << w, -x, -y, -z,
       x,  w,  z, -y,
       y, -z,  w,  x,
       z,  y, -x,  w;
  return m;
}

Mat3 Quat::rotation_matrix() const {
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
       2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y);
  return r;
}

Quat quat_mul(const Quat& p, const Quat& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

DualQuat DualQuat::from_vec(const Vec8& v) {
  return {Quat::from_vec(v.head<4>()), Quat::from_vec(v.tail<4>())};
}

DualQuat DualQuat::from_rotation_translation(const Quat& r, const Vec3& t) {
  return {r, 0.5 * (Quat::pure(t) * r)};
}

DualQuat DualQuat::from_matrix(const Mat4& T) {
  const Eigen::Quaterniond eq(Mat3(T.topLeftCorner<3, 3>()));
  Quat r{eq.w(), eq.x(), eq.y(), eq.z()};
  r = (1.0 / r.norm()) * r;
  return canonicalize(from_rotation_translation(r, T.topRightCorner<3, 1>()));
}

Vec8 DualQuat::vec() const {
  Vec8 v;
  v << real.w, real.x, real.y, real.z, dual.w, dual.x, dual.y, dual.z;
  return v;
}

bool DualQuat::is_unit(double tol) const {
  const double orth = real.w * dual.w + real.x * dual.x + real.y * dual.y + real.z * dual.z;
  return std::abs(real.squared_norm() - 1.0) <= tol && std::abs(2.0 * orth) <= tol;
}

Vec3 DualQuat::translation() const { return 2.0 * (dual * real.conjugate()).vector(); }

Mat4 DualQuat::to_matrix() const {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = rotation_matrix();
  T.topRightCorner<3, 1>() = translation();
  return T;
}

DualQuat dq_mul(const DualQuat& p, const DualQuat& q) {
  return {p.real * q.real, p.real * q.dual + p.dual * q.real};
}

DualQuat conjugate(const DualQuat& q) { return {q.real.conjugate(), q.dual.conjugate()}; }

DualQuat canonicalize(const DualQuat& q) {
  constexpr double kZero = 1e-12;
  if (q.real.w > kZero) return q;
  if (q.real.w < -kZero) return -q;
  const Vec8 v = q.vec();
  for (int i = 1; i < 8; ++i) {
    if (v[i] > kZero) return q;
    if (v[i] < -kZero) return -q;
  }
  return q;
}

DualQuat make_unit(const DualQuat& q, double tol) {
  const double n2 = q.real.squared_norm();
  const Vec4 r = q.real.vec();
  const Vec4 d = q.dual.vec();
  if (std::abs(n2 - 1.0) > tol || std::abs(2.0 * r.dot(d)) > tol) {
    throw Error(ErrorCode::NotUnit, "dual quaternion is not unit (|real|^2 = " + std::to_string(n2) +
                                        ", <real,dual> = " + std::to_string(r.dot(d)) + ")");
  }
  // Already unit to roundoff: leave the bits alone so serialization round-trips stay exact.
  if (std::abs(n2 - 1.0) <= 4e-16 && std::abs(r.dot(d)) <= 4e-16 * (1.0 + d.norm())) return q;
  const Vec4 rn = r / std::sqrt(n2);
  const Vec4 dn = d / std::sqrt(n2);
  return {Quat::from_vec(rn), Quat::from_vec(dn - rn.dot(dn) * rn)};
}

DualQuat from_rot_trans(const Vec3& axis, double angle, const Vec3& t) {
  Quat r = Quat::identity();
  if (angle != 0.0) {
    const double n = axis.norm();
    if (std::abs(n - 1.0) > 1e-9) {
      throw Error(ErrorCode::NonUnitAxis, "rotation axis norm " + std::to_string(n));
    }
    const Vec3 a = axis / n;
    const double s = std::sin(0.5 * angle);
    r = {std::cos(0.5 * angle), a.x() * s, a.y() * s, a.z() * s};
  }
  return canonicalize(DualQuat::from_rotation_translation(r, t));
}

RotTrans to_rot_trans(const DualQuat& q) {
  if (!q.is_unit()) throw Error(ErrorCode::NotUnit, "to_rot_trans requires a unit dual quaternion");
  const DualQuat c = canonicalize(q);
  const Vec3 v = c.real.vector();
  const double s = v.norm();
  RotTrans out;
  out.angle = 2.0 * std::atan2(s, c.real.w);
  out.axis = s > 0.0 ? Vec3(v / s) : Vec3::UnitX();
  out.translation = c.translation();
  return out;
}

Vec3 transform_point(const DualQuat& q, const Vec3& v) {
  if (!q.is_unit()) throw Error(ErrorCode::NotUnit, "transform_point requires a unit dual quaternion");
  const DualQuat point{Quat::identity(), Quat::pure(v)};
  const DualQuat bar{q.real.conjugate(), -q.dual.conjugate()};
  return (q * point * bar).dual.vector();
}

Mat8 left_mat(const DualQuat& p) {
  Mat8 m = Mat8::Zero();
  const Mat4 lr = p.real.left_mat();
  m.topLeftCorner<4, 4>() = lr;
  m.bottomRightCorner<4, 4>() = lr;
  m.bottomLeftCorner<4, 4>() = p.dual.left_mat();
  return m;
}

Mat8 right_mat(const DualQuat& q) {
  Mat8 m = Mat8::Zero();
  const Mat4 rr = q.real.right_mat();
  m.topLeftCorner<4, 4>() = rr;
  m.bottomRightCorner<4, 4>() = rr;
  m.bottomLeftCorner<4, 4>() = q.dual.right_mat();
  return m;
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonUnitAxis: return "NonUnitAxis";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateInit: return "DegenerateInit";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::NonUniqueSolution: return "NonUniqueSolution";
    case ErrorCode::NoNullSpace: return "NoNullSpace";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::InfeasiblePoint: return "InfeasiblePoint";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegeneratePath: return "DegeneratePath";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonOrthogonalRotation: return "NonOrthogonalRotation";
    case ErrorCode::NoOverlap: return "NoOverlap";
  }
  return "Unknown";
}

}  // namespace dqcalib
