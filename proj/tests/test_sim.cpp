#include <cmath>

#include <gtest/gtest.h>

#include "dqcalib/error.hpp"
#include "dqcalib/sim.hpp"
#include "support.hpp"

using namespace dqcalib;
using namespace dqcalib::test;

namespace {

double xy_step(const Trajectory& t, std::size_t i) {
  const Vec3 a = t.poses[i].pose.translation(), b = t.poses[i + 1].pose.translation();
  return (b - a).head<2>().norm();
}

}  // namespace

TEST(Surface, GradientMatchesFiniteDifferences) {
  const SurfaceSpec s = SurfaceSpec::sinusoid_mixture();
  ASSERT_EQ(s.terms.size(), 2u);
  const double h = 1e-6;
  for (double x : {-3.0, 0.4, 7.9}) {
    for (double y : {-1.0, 2.5}) {
      const Eigen::Vector2d g = s.gradient(x, y);
      EXPECT_NEAR(g.x(), (s.height(x + h, y) - s.height(x - h, y)) / (2 * h), 1e-8);
      EXPECT_NEAR(g.y(), (s.height(x, y + h) - s.height(x, y - h)) / (2 * h), 1e-8);
      const Vec3 n = s.normal(x, y);
      EXPECT_NEAR(n.norm(), 1.0, 1e-15);
      EXPECT_GT(n.z(), 0.0);
      EXPECT_NEAR(n.dot(Vec3(1, 0, g.x())), 0.0, 1e-15);
    }
  }
  EXPECT_EQ(SurfaceSpec::flat().height(3, 4), 0.0);
}

TEST(Path, PosesSitOnSurfaceWithNormalZAxis) {
  SimConfig cfg;
  cfg.path.kind = PathKind::figure_eight;
  cfg.num_poses = 60;
  const Trajectory t = generate_path(cfg);
  ASSERT_EQ(t.poses.size(), 60u);
  for (std::size_t i = 0; i < t.poses.size(); ++i) {
    const Vec3 p = t.poses[i].pose.translation();
    const Mat3 R = t.poses[i].pose.rotation_matrix();
    EXPECT_NEAR(p.z(), cfg.surface.height(p.x(), p.y()), 1e-12);
    EXPECT_LT((R.col(2) - cfg.surface.normal(p.x(), p.y())).norm(), 1e-12);
    EXPECT_NEAR(t.poses[i].t, i * cfg.dt, 1e-12);
  }
}

TEST(Path, EqualSpacing) {
  for (PathKind k : {PathKind::line, PathKind::circle, PathKind::figure_eight, PathKind::lissajous}) {
    SimConfig cfg;
    cfg.surface = SurfaceSpec::flat();
    cfg.path.kind = k;
    cfg.num_poses = 80;
    cfg.step_length = 0.5;
    const Trajectory t = generate_path(cfg);
    for (std::size_t i = 0; i + 1 < t.poses.size(); ++i) EXPECT_NEAR(xy_step(t, i), 0.5, 0.01) << to_string(k);
  }
}

TEST(Path, CircleIsExact) {
  SimConfig cfg;
  cfg.surface = SurfaceSpec::flat();
  cfg.path.scale = 4.0;
  const Trajectory t = generate_path(cfg);
  const Vec3 centre(0, 4, 0);
  for (const auto& p : t.poses) EXPECT_NEAR((p.pose.translation() - centre).norm(), 4.0, 1e-12);
}

TEST(Path, WaypointsAndErrors) {
  SimConfig cfg;
  cfg.surface = SurfaceSpec::flat();
  cfg.path.kind = PathKind::waypoints;
  cfg.path.waypoints = {{0, 0}, {4, 0}, {4, 3}};
  cfg.step_length = 1.0;
  cfg.num_poses = 20;
  const Trajectory t = generate_path(cfg);
  // Closed loop of perimeter 12: pose 12 returns to the start.
  EXPECT_LT(t.poses[12].pose.translation().norm(), 1e-12);
  EXPECT_LT((t.poses[5].pose.translation() - Vec3(4, 1, 0)).norm(), 1e-12);

  cfg.path.waypoints = {{0, 0}, {1, 1}, {1, 1}};
  try {
    generate_path(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegeneratePath);
  }
  EXPECT_EQ(parse_path_kind("lissajous"), PathKind::lissajous);
  EXPECT_THROW(parse_path_kind("spiral"), Error);
}

TEST(Sim, ValidationErrors) {
  SimConfig cfg;
  cfg.num_poses = 1;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.dt = 0.0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.noise.level = -0.1;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(Sim, MotionsSatisfyLoopCondition) {
  std::mt19937_64 rng(120);
  SimConfig cfg;
  cfg.true_calib = random_calibration(rng);
  const SimResult r = simulate(cfg);
  ASSERT_EQ(r.pairs.size(), 100u);
  EXPECT_EQ(r.pairs.size(), r.clean.size());
  for (const auto& p : r.pairs) {
    EXPECT_LT(((p.q_a * cfg.true_calib).vec() - (cfg.true_calib * p.q_b).vec()).norm(), 1e-12);
  }
  // Chaining the motions of b reproduces the poses.
  DualQuat pose = r.poses.poses.front().pose;
  for (const auto& p : r.pairs) pose = pose * p.q_b;
  EXPECT_LT((pose.to_matrix() - r.poses.poses.back().pose.to_matrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Sim, RandomCalibrationRange) {
  std::mt19937_64 rng(121);
  for (int i = 0; i < 100; ++i) {
    const DualQuat q = random_calibration(rng);
    EXPECT_TRUE(q.is_unit());
    const double d = q.translation().norm();
    EXPECT_GE(d, 2.0 - 1e-12);
    EXPECT_LE(d, 8.0 + 1e-12);
  }
}

TEST(Noise, RelativeSigmasAndDeterminism) {
  SimConfig cfg;
  const SimResult r = simulate(cfg);
  const NoiseSpec n{true, 0.1};
  const NoiseSigmas s = noise_sigmas(r.clean, n);
  double mean_t = 0;
  for (const auto& p : r.clean) mean_t += p.q_b.translation().norm();
  EXPECT_NEAR(s.sigma_t_b, 0.1 * mean_t / r.clean.size(), 1e-14);
  EXPECT_GT(s.sigma_r_b, 0.0);

  const auto a = add_noise(r.clean, n, 7), b = add_noise(r.clean, n, 7), c = add_noise(r.clean, n, 8);
  EXPECT_EQ(a[5].q_a.vec(), b[5].q_a.vec());
  EXPECT_NE(a[5].q_a.vec(), c[5].q_a.vec());
  EXPECT_TRUE(a[5].q_a.is_unit());
  const auto none = add_noise(r.clean, NoiseSpec{true, 0.0}, 7);
  EXPECT_EQ(none[3].q_b.vec(), r.clean[3].q_b.vec());
}

TEST(Noise, EmpiricalTranslationSpread) {
  SimConfig cfg;
  cfg.num_poses = 2001;
  const SimResult r = simulate(cfg);
  const NoiseSpec n{false, 0.0, 0.05, 0.0};
  const auto noisy = add_noise(r.clean, n, 3);
  double ss = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) ss += (noisy[i].q_b.translation() - r.clean[i].q_b.translation()).squaredNorm();
  EXPECT_NEAR(std::sqrt(ss / (3.0 * noisy.size())), 0.05, 0.003);
}

TEST(Rig, CalibrationAndLoopCondition) {
  std::mt19937_64 rng(122);
  SensorRig rig{random_pose(rng), random_pose(rng)};
  SimConfig cfg;
  cfg.num_poses = 20;
  const auto pairs = rig_motions(generate_path(cfg), rig);
  const DualQuat T = rig.calibration();
  for (const auto& p : pairs) EXPECT_LT(((p.q_a * T).vec() - (T * p.q_b).vec()).norm(), 1e-12);
  // Point in b's frame, through the vehicle, into a's frame.
  const Vec3 x(0.3, -1.0, 2.0);
  const Vec3 via = transform_point(conjugate(rig.mount_a), transform_point(rig.mount_b, x));
  EXPECT_LT((transform_point(T, x) - via).norm(), 1e-12);
}
