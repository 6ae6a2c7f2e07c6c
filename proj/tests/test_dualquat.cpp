#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dqcalib/error.hpp"
#include "support.hpp"

using namespace dqcalib;
using namespace dqcalib::test;

TEST(Quat, HamiltonProductTable) {
  const Quat i{0, 1, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1};
  EXPECT_EQ(i * j, k);
  EXPECT_EQ(j * k, i);
  EXPECT_EQ(k * i, j);
  EXPECT_EQ(j * i, -k);
  EXPECT_EQ(i * i, (Quat{-1, 0, 0, 0}));
}

TEST(Quat, ProductMatricesAgreeWithProduct) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int n = 0; n < 200; ++n) {
    const Quat p{g(rng), g(rng), g(rng), g(rng)}, q{g(rng), g(rng), g(rng), g(rng)};
    const Vec4 pq = (p * q).vec();
    EXPECT_LT((p.left_mat() * q.vec() - pq).norm(), 1e-14);
    EXPECT_LT((q.right_mat() * p.vec() - pq).norm(), 1e-14);
  }
}

TEST(Quat, RotationMatrixMatchesEigen) {
  std::mt19937_64 rng(2);
  for (int n = 0; n < 200; ++n) {
    const Quat q = random_rotation(rng);
    EXPECT_LT((q.rotation_matrix() - eigen_rotation(q)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(DualQuat, FromRotTransMatchesAngleAxis) {
  const Vec3 axis = Vec3(1, 2, 3).normalized();
  const double angle = 0.7;
  const Vec3 t(4, -5, 6);
  const DualQuat q = from_rot_trans(axis, angle, t);
  const Mat3 R = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  EXPECT_LT((q.to_matrix() - homogeneous(R, t)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(q.is_unit());
  EXPECT_GT(q.real.w, 0.0);

  const RotTrans rt = to_rot_trans(q);
  EXPECT_NEAR(rt.angle, angle, 1e-14);
  EXPECT_LT((rt.axis - axis).norm(), 1e-14);
  EXPECT_LT((rt.translation - t).norm(), 1e-14);
}

TEST(DualQuat, PureTranslationFormula) {
  // real = 1, dual = t / 2
  const DualQuat q = from_rot_trans(Vec3::UnitX(), 0.0, Vec3(2, 4, 6));
  EXPECT_EQ(q.vec(), (Vec8() << 1, 0, 0, 0, 0, 1, 2, 3).finished());
  EXPECT_EQ(to_rot_trans(q).axis, Vec3::UnitX());
}

TEST(DualQuat, RejectsNonUnitAxis) {
  try {
    from_rot_trans(Vec3(1, 1, 0), 0.3, Vec3::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonUnitAxis);
  }
  EXPECT_NO_THROW(from_rot_trans(Vec3(1, 1, 0), 0.0, Vec3::Zero()));
}

TEST(DualQuat, CompositionIsMatrixProduct) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 500; ++n) {
    const DualQuat p = random_pose(rng), q = random_pose(rng);
    EXPECT_LT(((p * q).to_matrix() - p.to_matrix() * q.to_matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE((p * q).is_unit(1e-12));
  }
}

TEST(DualQuat, TransformPointMatchesMatrix) {
  std::mt19937_64 rng(4);
  for (int n = 0; n < 200; ++n) {
    const DualQuat q = random_pose(rng);
    const Vec3 v = random_vec(rng, 3.0);
    const Vec3 ref = eigen_rotation(q.real) * v + q.translation();
    EXPECT_LT((transform_point(q, v) - ref).norm(), 1e-12);
  }
}

TEST(DualQuat, ConjugateIsInverse) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    const DualQuat q = random_pose(rng);
    EXPECT_LT(((q * conjugate(q)).vec() - DualQuat::identity().vec()).norm(), 1e-13);
    EXPECT_LT((conjugate(q).to_matrix() - q.to_matrix().inverse()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DualQuat, DoubleCover) {
  std::mt19937_64 rng(6);
  const DualQuat q = random_pose(rng);
  EXPECT_LT((q.to_matrix() - (-q).to_matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(canonicalize(-q), canonicalize(q));
}

TEST(DualQuat, CanonicalizeZeroScalar) {
  // Half turn: w = 0, so the first nonzero component decides the sign.
  const DualQuat q = from_rot_trans(Vec3::UnitY(), std::numbers::pi, Vec3(1, 0, 0));
  const DualQuat c = canonicalize(-q);
  EXPECT_GT(c.real.y, 0.0);
  EXPECT_EQ(canonicalize(c), c);
}

TEST(DualQuat, MatrixRoundTrip) {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 100; ++n) {
    const DualQuat q = canonicalize(random_pose(rng));
    EXPECT_LT((DualQuat::from_matrix(q.to_matrix()).vec() - q.vec()).norm(), 1e-13);
  }
}

TEST(DualQuat, MakeUnitRepairsAndRejects) {
  std::mt19937_64 rng(8);
  const DualQuat q = random_pose(rng);
  EXPECT_EQ(make_unit(q).vec(), q.vec());  // already unit: untouched

  Vec8 v = q.vec();
  v[0] += 3e-7;
  v[5] += 2e-7;
  const DualQuat r = make_unit(DualQuat::from_vec(v));
  EXPECT_TRUE(r.is_unit(1e-14));
  EXPECT_LT((r.vec() - q.vec()).norm(), 1e-6);

  v[0] += 1e-3;
  try {
    make_unit(DualQuat::from_vec(v));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotUnit);
  }
}

TEST(DualQuat, EightByEightProductMatrices) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int n = 0; n < 200; ++n) {
    Vec8 a, b;
    for (int i = 0; i < 8; ++i) a[i] = g(rng), b[i] = g(rng);
    const DualQuat p = DualQuat::from_vec(a), q = DualQuat::from_vec(b);
    const Vec8 pq = (p * q).vec();
    EXPECT_LT((left_mat(p) * b - pq).norm(), 1e-13);
    EXPECT_LT((right_mat(q) * a - pq).norm(), 1e-13);
  }
}

TEST(DualQuat, LeftAndRightMatricesCommute) {
  // (p x) q = p (x q): left and right multiplication commute.
  std::mt19937_64 rng(10);
  const DualQuat p = random_pose(rng), q = random_pose(rng);
  EXPECT_LT((left_mat(p) * right_mat(q) - right_mat(q) * left_mat(p)).cwiseAbs().maxCoeff(), 1e-13);
}
