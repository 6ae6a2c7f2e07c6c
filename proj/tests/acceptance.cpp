// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dqcalib/error.hpp"
#include "dqcalib/global_solver.hpp"
#include "dqcalib/local_solver.hpp"
#include "dqcalib/metrics.hpp"
#include "dqcalib/online.hpp"
#include "dqcalib/sim.hpp"
#include "dqcalib/study.hpp"
#include "dqcalib/verify.hpp"

using namespace dqcalib;

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kDegToRad = std::numbers::pi / 180.0;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Mat8 normalized_cost(const std::vector<MotionPair>& pairs, ConstraintMode mode = ConstraintMode::full3D) {
  CostAccumulator acc(mode);
  for (const auto& p : pairs) acc.add(p);
  return acc.normalized();
}

// Random path and calibration on the default undulating surface.
SimConfig random_case(std::mt19937_64& rng, double noise, int num_poses) {
  static const PathKind kinds[] = {PathKind::circle, PathKind::figure_eight, PathKind::lissajous};
  SimConfig cfg;
  cfg.path.kind = kinds[rng() % 3];
  cfg.path.scale = std::uniform_real_distribution<double>(5.0, 15.0)(rng);
  cfg.num_poses = num_poses;
  cfg.true_calib = random_calibration(rng);
  cfg.noise.level = noise;
  cfg.seed = rng();
  return cfg;
}

// ---------------------------------------------------------------- 1, 2

void exact_recovery() {
  std::mt19937_64 rng(1001);
  int ok_global = 0, ok_local = 0, ok_cert = 0, ok_dup = 0;
  double worst_r = 0, worst_t = 0, worst_gap = 0, worst_dup = 0;
  const int cases = 100;
  const auto t0 = Clock::now();
  double solve_seconds = 0.0;
  for (int i = 0; i < cases; ++i) {
    const SimConfig cfg = random_case(rng, 0.0, 20 + static_cast<int>(rng() % 81));
    const SimResult sim = simulate(cfg);
    CostAccumulator acc;
    for (const auto& p : sim.pairs) acc.add(p);
    const Mat8 Q = acc.normalized();
    try {
      const auto ts = Clock::now();
      const CalibSolution g = solve_global(acc);
      const LocalSolution l = solve_local(Q, ConstraintMode::full3D);
      solve_seconds += seconds_since(ts);
      const CalibError eg = calib_error(g.q_hat, cfg.true_calib);
      const CalibError el = calib_error(DualQuat::from_vec(l.q_hat), cfg.true_calib);
      worst_r = std::max({worst_r, eg.eps_r, el.eps_r});
      worst_t = std::max({worst_t, eg.eps_t, el.eps_t});
      worst_gap = std::max(worst_gap, std::abs(g.gap));
      if (eg.eps_r < 1e-6 && eg.eps_t < 1e-6 && std::abs(g.gap) < 1e-9) ++ok_global;
      if (el.eps_r < 1e-6 && el.eps_t < 1e-6) ++ok_local;

      const Certificate c = certify(Q, g.q_hat.vec(), ConstraintMode::full3D);
      if (c.is_global) ++ok_cert;
      CostAccumulator dup = acc;
      for (const auto& p : sim.pairs) dup.add(p);
      const Certificate cd = certify(dup.normalized(), g.q_hat.vec(), ConstraintMode::full3D);
      const double d = std::abs(cd.gap - c.gap);
      worst_dup = std::max(worst_dup, d);
      if (d <= 1e-12) ++ok_dup;
    } catch (const std::exception& e) {
      std::printf("  case %d: %s\n", i, e.what());
    }
  }
  const double total = seconds_since(t0);
  report(1, ok_global == cases && ok_local == cases && solve_seconds < 10.0,
         fmt("global %d/%d, local %d/%d; max eps_r %.2e rad, eps_t %.2e m, |gap| %.2e; solve time %.2f s (%.2f s incl. simulation)",
             ok_global, cases, ok_local, cases, worst_r, worst_t, worst_gap, solve_seconds, total));
  report(2, ok_cert == cases && ok_dup == cases,
         fmt("is_global %d/%d; duplicated data changes gap by at most %.2e", ok_cert, cases, worst_dup));
}

// ---------------------------------------------------------------- 3

// Independent oracle. For fixed lambda2 the dual-block Z_dd = Q_dd does not depend
// on the multipliers, so Z >= 0 iff Q_dd > 0 and the Schur complement
// S = Z_rr - Z_rd Q_dd^-1 Z_dr >= 0. Since lambda1 enters as -lambda1 I on the
// real block, the largest feasible lambda1 is lambda_min(S at lambda1 = 0).
double schur_h(const Mat8& Q, double l2) {
  const Mat8 Z = assemble_Z(Q, make_multipliers(ConstraintMode::full3D, {0.0, l2}));
  const Mat4 S = Z.topLeftCorner<4, 4>() - Z.topRightCorner<4, 4>() * Z.bottomRightCorner<4, 4>().ldlt().solve(Z.bottomLeftCorner<4, 4>());
  return Eigen::SelfAdjointEigenSolver<Mat4>(S, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

double brute_force_lambda1(const Mat8& Q) {
  const double span = 10.0 * (1.0 + Q.cwiseAbs().maxCoeff());
  double lo = -span, hi = span, best = -INFINITY, best_l2 = 0.0;
  // Coarse grid, then repeated 10x zoom around the best cell.
  for (int level = 0; level < 14; ++level) {
    const int n = level == 0 ? 2001 : 41;
    for (int i = 0; i <= n; ++i) {
      const double l2 = lo + (hi - lo) * i / n;
      const double h = schur_h(Q, l2);
      if (h > best) best = h, best_l2 = l2;
    }
    const double cell = (hi - lo) / n;
    lo = best_l2 - 2.0 * cell;
    hi = best_l2 + 2.0 * cell;
  }
  return best;
}

void dual_oracle() {
  std::mt19937_64 rng(2002);
  const double noise[] = {0.02, 0.05, 0.10};
  int ok = 0;
  double worst = 0.0;
  const int cases = 50;
  for (int i = 0; i < cases; ++i) {
    const SimConfig cfg = random_case(rng, noise[i % 3], 101);
    const Mat8 Q = normalized_cost(simulate(cfg).pairs);
    const Multipliers lam = solve_dual(Q, ConstraintMode::full3D);
    const double d = std::abs(lam[0] - brute_force_lambda1(Q));
    worst = std::max(worst, d);
    if (d < 1e-6) ++ok;
  }
  report(3, ok == cases, fmt("%d/%d datasets match the Schur-complement scan; max |dlambda1| %.2e", ok, cases, worst));
}

// ---------------------------------------------------------------- 4

void local_global_agreement() {
  std::mt19937_64 rng(3003);
  const double noise[] = {0.01, 0.02, 0.05, 0.10};
  int ok = 0;
  double worst_r = 0, worst_t = 0;
  const int cases = 50;
  for (int i = 0; i < cases; ++i) {
    const SimConfig cfg = random_case(rng, noise[i % 4], 101 + static_cast<int>(rng() % 200));
    const SimResult sim = simulate(cfg);
    // Warm start: the global solution on the first 80% of the stream.
    const std::size_t head = sim.pairs.size() * 4 / 5;
    CostAccumulator prefix, full;
    for (std::size_t k = 0; k < sim.pairs.size(); ++k) {
      if (k < head) prefix.add(sim.pairs[k]);
      full.add(sim.pairs[k]);
    }
    try {
      const CalibSolution warm = solve_global(prefix);
      const CalibSolution g = solve_global(full);
      LocalSolveOptions lo;
      lo.init = warm.q_hat.vec();
      const LocalSolution l = solve_local(full.normalized(), ConstraintMode::full3D, lo);
      const CalibError e = calib_error(DualQuat::from_vec(l.q_hat), g.q_hat);
      const Certificate c = certify(full.normalized(), l.q_hat, ConstraintMode::full3D);
      worst_r = std::max(worst_r, e.eps_r);
      worst_t = std::max(worst_t, e.eps_t);
      if (e.eps_r < 1e-4 && e.eps_t < 1e-4 && c.is_global) ++ok;
    } catch (const std::exception& e) {
      std::printf("  case %d: %s\n", i, e.what());
    }
  }
  report(4, ok == cases, fmt("%d/%d agree and certify; max eps_r %.2e rad, eps_t %.2e m", ok, cases, worst_r, worst_t));
}

// ---------------------------------------------------------------- 5

void falsification() {
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> gauss;
  int yaw_flip = 0, trans_flip = 0, trials = 0, uncertified = 0;
  while (trials < 100) {
    const SimConfig cfg = random_case(rng, 0.02, 101);
    CostAccumulator acc;
    for (const auto& p : simulate(cfg).pairs) acc.add(p);
    const Mat8 Q = acc.normalized();
    CalibSolution sol;
    try {
      sol = solve_global(acc);
    } catch (const std::exception&) {
      ++uncertified;
      continue;
    }
    if (!certify(Q, sol.q_hat.vec(), ConstraintMode::full3D).is_global) {
      ++uncertified;
      continue;
    }
    ++trials;
    const DualQuat yaw = sol.q_hat * from_rot_trans(Vec3::UnitZ(), 0.1 * kDegToRad, Vec3::Zero());
    const Vec3 dir = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    const DualQuat shifted = from_rot_trans(Vec3::UnitX(), 0.0, 0.1 * dir) * sol.q_hat;
    if (!certify(Q, yaw.vec(), ConstraintMode::full3D).is_global) ++yaw_flip;
    if (!certify(Q, shifted.vec(), ConstraintMode::full3D).is_global) ++trans_flip;
  }
  report(5, yaw_flip >= 95 && trans_flip >= 95,
         fmt("0.1 deg yaw rejected %d/100, 0.1 m shift rejected %d/100 (%d uncertified datasets skipped)", yaw_flip, trans_flip,
             uncertified));
}

// ---------------------------------------------------------------- 6

void study_trend() {
  StudyConfig cfg;
  cfg.noise_levels = {0.02, 0.05, 0.10};
  cfg.sizes = {25, 50, 100, 200, 400};
  cfg.seeds = 8;
  cfg.base_seed = 6006;
  const auto t0 = Clock::now();
  const auto rows = run_study(cfg);
  const double secs = seconds_since(t0);
  const auto med = median_eps_t(cfg, rows);
  bool ok = secs < 300.0;
  std::string cells;
  for (std::size_t i = 0; i < med.size(); ++i) {
    int inversions = 0;
    for (std::size_t j = 1; j < med[i].size(); ++j) {
      if (!(med[i][j] <= med[i][j - 1])) ++inversions;
    }
    if (inversions > 1) ok = false;
    cells += fmt(" [%g%%:", 100 * cfg.noise_levels[i]);
    for (double v : med[i]) cells += fmt(" %.3g", v);
    cells += fmt("; %d inv]", inversions);
  }
  report(6, ok, fmt("median eps_t [m]%s; %.1f s", cells.c_str(), secs));
}

// ---------------------------------------------------------------- 7, 8

struct PlanarScene {
  Trajectory vehicle;
  SensorRig rig;
  std::vector<MotionPair> pairs;
};

// Flat-ground drive with both sensors mounted tilted, so each sees the ground as
// a tilted plane.
PlanarScene planar_scene(std::uint64_t seed, int num_poses) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), h(0.5, 2.0);
  SimConfig cfg;
  cfg.surface = SurfaceSpec::flat();
  cfg.path.kind = PathKind::lissajous;
  cfg.num_poses = num_poses;
  PlanarScene s;
  s.vehicle = generate_path(cfg);
  auto mount = [&] {
    const Vec3 axis = Vec3(0.3 * u(rng), 0.3 * u(rng), 1.0).normalized();
    return from_rot_trans(axis, 1.5 * u(rng), Vec3(3 * u(rng), 3 * u(rng), h(rng)));
  };
  s.rig.mount_a = mount();
  s.rig.mount_b = mount();
  s.pairs = rig_motions(s.vehicle, s.rig);
  return s;
}

void planar_pipeline() {
  int ok = 0, nonunique = 0;
  const int cases = 10;
  double worst = 0.0;
  bool flagged = true;
  for (int i = 0; i < cases; ++i) {
    const PlanarScene s = planar_scene(7000 + i, 101);
    const GroundPlane pa = s.rig.ground_plane_a(), pb = s.rig.ground_plane_b();
    CostAccumulator acc(ConstraintMode::planar, PlaneAlignment::from_planes(pa, pb)), acc3;
    for (const auto& p : s.pairs) {
      acc.add(p);
      acc3.add(p);
    }
    try {
      const CalibSolution sol = solve_global(acc);
      const DualQuat truth = s.rig.calibration();
      // x, y and yaw of the calibration in the plane-aligned frames.
      const PlaneAlignment al = PlaneAlignment::from_planes(pa, pb);
      const DualQuat est_p = project_calibration(sol.q_hat, al.a, al.b);
      const DualQuat true_p = project_calibration(truth, al.a, al.b);
      const Vec3 te = est_p.translation(), tt = true_p.translation();
      const double yaw_e = 2 * std::atan2(est_p.real.z, est_p.real.w), yaw_t = 2 * std::atan2(true_p.real.z, true_p.real.w);
      const double dyaw = std::abs(std::remainder(yaw_e - yaw_t, 2 * std::numbers::pi));
      const double d = std::max({std::abs(te.x() - tt.x()), std::abs(te.y() - tt.y()), dyaw});
      const CalibError e3 = calib_error(sol.q_hat, truth);
      worst = std::max({worst, d, e3.eps_r, e3.eps_t});
      flagged = flagged && sol.plane_derived;
      if (d < 1e-6 && e3.eps_r < 1e-6 && e3.eps_t < 1e-6) ++ok;
    } catch (const std::exception& e) {
      std::printf("  case %d: %s\n", i, e.what());
    }
    try {
      solve_global(acc3);
    } catch (const NonUniqueSolutionError&) {
      ++nonunique;
    } catch (const std::exception& e) {
      std::printf("  case %d (3D): %s\n", i, e.what());
    }
  }
  report(7, ok == cases && flagged && nonunique == cases,
         fmt("lifted calibration matches %d/%d (max error %.2e), plane-derived flag %s, 3D-mode NonUniqueSolution %d/%d", ok,
             cases, worst, flagged ? "set" : "missing", nonunique, cases));
}

void online_replay() {
  const PlanarScene s = planar_scene(8008, 501);
  OnlineConfig cfg;
  cfg.mode = ConstraintMode::planar;
  cfg.plane_a = s.rig.ground_plane_a();
  cfg.plane_b = s.rig.ground_plane_b();
  const auto t0 = Clock::now();
  const std::vector<CalibSolution> trace = replay(s.pairs, cfg);
  const double secs = seconds_since(t0);
  int switches = 0, bad_local = 0, globals = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].provenance == Provenance::global) ++globals;
    if (i > 0 && trace[i - 1].provenance == Provenance::global && trace[i].provenance == Provenance::local) ++switches;
    if (trace[i].provenance == Provenance::local && trace[i].is_global && !(std::abs(trace[i].gap) < cfg.gap_threshold)) ++bad_local;
  }
  CostAccumulator acc(ConstraintMode::planar, PlaneAlignment::from_planes(*cfg.plane_a, *cfg.plane_b));
  for (const auto& p : s.pairs) acc.add(p);
  const CalibSolution batch = solve_global(acc);
  const DualQuat truth = s.rig.calibration();
  const CalibError eo = calib_error(trace.back().q_hat, truth), eb = calib_error(batch.q_hat, truth);
  const CalibError between = calib_error(trace.back().q_hat, batch.q_hat);
  const double d = std::max({std::abs(eo.eps_r - eb.eps_r), std::abs(eo.eps_t - eb.eps_t), between.eps_r, between.eps_t});
  report(8, trace.size() == 500 && switches == 1 && bad_local == 0 && d < 1e-6,
         fmt("%zu steps, %d global, %d global->local switch(es), %d certified-local steps over threshold, online vs batch %.2e; %.2f s",
             trace.size(), globals, switches, bad_local, d, secs));
}

// ---------------------------------------------------------------- 9

void performance() {
  std::mt19937_64 rng(9009);
  std::vector<double> local_ms, cert_ms;
  for (int i = 0; i < 20; ++i) {
    const SimConfig cfg = random_case(rng, 0.05, 201);
    const SimResult sim = simulate(cfg);
    CostAccumulator prefix, full;
    for (std::size_t k = 0; k < sim.pairs.size(); ++k) {
      if (k + 1 < sim.pairs.size()) prefix.add(sim.pairs[k]);
      full.add(sim.pairs[k]);
    }
    // Warm start from the previous step's solution, as in the online loop.
    LocalSolveOptions lo;
    lo.init = solve_local(prefix.normalized(), ConstraintMode::full3D).q_hat;
    const Mat8 Q = full.normalized();
    auto t0 = Clock::now();
    const LocalSolution l = solve_local(Q, ConstraintMode::full3D, lo);
    local_ms.push_back(1e3 * seconds_since(t0));
    t0 = Clock::now();
    const Certificate c = certify(Q, l.q_hat, ConstraintMode::full3D);
    cert_ms.push_back(1e3 * seconds_since(t0));
    (void)c;
  }
  const double lmax = *std::max_element(local_ms.begin(), local_ms.end());
  const double cmax = *std::max_element(cert_ms.begin(), cert_ms.end());
  report(9, lmax < 50.0 && cmax < 5.0, fmt("200 pairs: warm-started local solve max %.3f ms, certification max %.3f ms", lmax, cmax));
}

// ---------------------------------------------------------------- 10

DualQuat random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const Quat r = Quat::from_vec(Vec4(g(rng), g(rng), g(rng), g(rng)).normalized());
  return DualQuat::from_rotation_translation(r, 5.0 * Vec3(g(rng), g(rng), g(rng)));
}

void algebra() {
  std::mt19937_64 rng(10010);
  std::normal_distribution<double> g;
  int unit = 0, homo = 0, matrix = 0, cover = 0;
  double worst_mat = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const DualQuat p = random_unit(rng), q = random_unit(rng);
    const DualQuat pq = p * q;
    if (pq.is_unit(1e-12)) ++unit;

    const Mat4 Mp = p.to_matrix(), Mq = q.to_matrix();
    const double scale = 1.0 + Mp.cwiseAbs().maxCoeff() * Mq.cwiseAbs().maxCoeff();
    if ((pq.to_matrix() - Mp * Mq).cwiseAbs().maxCoeff() < 1e-12 * scale) ++homo;

    // Arbitrary (non-unit) operands for the product matrices.
    Vec8 a, b;
    for (int k = 0; k < 8; ++k) a[k] = g(rng), b[k] = g(rng);
    const DualQuat da = DualQuat::from_vec(a), db = DualQuat::from_vec(b);
    const Vec8 ab = (da * db).vec();
    const double e = std::max((left_mat(da) * b - ab).cwiseAbs().maxCoeff(), (right_mat(db) * a - ab).cwiseAbs().maxCoeff());
    worst_mat = std::max(worst_mat, e);
    if (e < 1e-12) ++matrix;

    const Vec3 v(g(rng), g(rng), g(rng));
    const Vec3 x1 = transform_point(p, v), x2 = transform_point(-p, v);
    if ((Mp - (-p).to_matrix()).cwiseAbs().maxCoeff() < 1e-12 && (x1 - x2).norm() < 1e-12 * (1 + x1.norm())) ++cover;
  }
  report(10, unit == n && homo == n && matrix == n && cover == n,
         fmt("unit %d, homomorphism %d, product matrices %d (max err %.1e), double cover %d of %d", unit, homo, matrix, worst_mat,
             cover, n));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps = {exact_recovery, dual_oracle,    local_global_agreement, falsification,
                                                    study_trend,    planar_pipeline, online_replay,         performance,
                                                    algebra};
  for (const auto& s : steps) {
    try {
      s();
    } catch (const std::exception& e) {
      std::printf("unexpected exception: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%s (%d failing)\n", failures == 0 ? "ALL PASS" : "SOME FAIL", failures);
  return failures == 0 ? 0 : 1;
}
