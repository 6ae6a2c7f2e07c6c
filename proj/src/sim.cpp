#include "dqcalib/sim.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "dqcalib/error.hpp"

namespace dqcalib {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Curve {
  std::function<Eigen::Vector2d(double)> point;
  std::function<Eigen::Vector2d(double)> tangent;
};

Curve parametric_curve(const PathSpec& p) {
  const double s = p.scale;
  switch (p.kind) {
    case PathKind::figure_eight:
      return {[s](double u) { return Eigen::Vector2d(s * std::sin(u), 0.5 * s * std::sin(2.0 * u)); },
              [s](double u) { return Eigen::Vector2d(s * std::cos(u), s * std::cos(2.0 * u)); }};
    case PathKind::lissajous:
      return {[s](double u) { return Eigen::Vector2d(s * std::sin(3.0 * u), s * std::sin(2.0 * u)); },
              [s](double u) { return Eigen::Vector2d(3.0 * s * std::cos(3.0 * u), 2.0 * s * std::cos(2.0 * u)); }};
    default:
      throw Error(ErrorCode::InvalidArgument, "not a parametric path kind");
  }
}

struct PlanarSample {
  Eigen::Vector2d p;
  Eigen::Vector2d dir;  // unit horizontal tangent
};

// Equal arc-length samples of a closed parametric curve, by dense integration.
std::vector<PlanarSample> sample_curve(const Curve& c, double step, int count) {
  constexpr int kSub = 4000;  // integration substeps per revolution quarter
  const double du = kTwoPi / (4.0 * kSub);
  std::vector<PlanarSample> out;
  out.reserve(count);
  double u = 0.0;
  Eigen::Vector2d prev = c.point(u);
  out.push_back({prev, c.tangent(u).normalized()});
  double acc = 0.0;
  while (static_cast<int>(out.size()) < count) {
    const Eigen::Vector2d next = c.point(u + du);
    const double seg = (next - prev).norm();
    if (acc + seg >= step) {
      const double f = (step - acc) / seg;
      const double us = u + f * du;
      out.push_back({c.point(us), c.tangent(us).normalized()});
      // restart the accumulation from the emitted sample
      u = us;
      prev = out.back().p;
      acc = 0.0;
      continue;
    }
    acc += seg;
    u += du;
    prev = next;
  }
  return out;
}

std::vector<PlanarSample> sample_polyline(const std::vector<Eigen::Vector2d>& w, double step, int count) {
  if (w.size() < 2) throw Error(ErrorCode::DegeneratePath, "a waypoint path needs at least two waypoints");
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if ((w[i + 1] - w[i]).norm() < 1e-12) {
      throw Error(ErrorCode::DegeneratePath, "consecutive waypoints " + std::to_string(i) + " and " +
                                                 std::to_string(i + 1) + " coincide");
    }
  }
  // Closed loop when the last waypoint does not return to the first.
  std::vector<Eigen::Vector2d> loop = w;
  if ((w.back() - w.front()).norm() >= 1e-12) loop.push_back(w.front());

  std::vector<PlanarSample> out;
  out.reserve(count);
  std::size_t seg = 0;
  double along = 0.0;
  while (static_cast<int>(out.size()) < count) {
    const Eigen::Vector2d d = loop[seg + 1] - loop[seg];
    const double len = d.norm();
    if (along > len) {
      along -= len;
      seg = (seg + 1) % (loop.size() - 1);
      continue;
    }
    out.push_back({loop[seg] + (along / len) * d, d / len});
    along += step;
  }
  return out;
}

std::vector<PlanarSample> sample_path(const SimConfig& cfg) {
  const int n = cfg.num_poses;
  const double step = cfg.step_length;
  std::vector<PlanarSample> out;
  switch (cfg.path.kind) {
    case PathKind::line:
      for (int i = 0; i < n; ++i) out.push_back({Eigen::Vector2d(i * step, 0.0), Eigen::Vector2d::UnitX()});
      return out;
    case PathKind::circle: {
      const double r = cfg.path.scale;
      for (int i = 0; i < n; ++i) {
        const double a = i * step / r;
        out.push_back({Eigen::Vector2d(r * std::sin(a), r * (1.0 - std::cos(a))), Eigen::Vector2d(std::cos(a), std::sin(a))});
      }
      return out;
    }
    case PathKind::waypoints:
      return sample_polyline(cfg.path.waypoints, step, n);
    default:
      return sample_curve(parametric_curve(cfg.path), step, n);
  }
}

Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec4 v;
  do {
    v = Vec4(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (v.norm() < 1e-9);
  return Quat::from_vec(v.normalized());
}

Vec3 random_axis(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(gauss(rng), gauss(rng), gauss(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

DualQuat perturb(const DualQuat& q, double sigma_t, double sigma_r, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 axis = random_axis(rng);
  const double angle = sigma_r * gauss(rng);
  const Vec3 dt(sigma_t * gauss(rng), sigma_t * gauss(rng), sigma_t * gauss(rng));
  const double h = 0.5 * angle;
  const Quat r{std::cos(h), axis.x() * std::sin(h), axis.y() * std::sin(h), axis.z() * std::sin(h)};
  return canonicalize(make_unit(DualQuat::from_rotation_translation(r, dt) * q));
}

}  // namespace

PathKind parse_path_kind(std::string_view name) {
  if (name == "line") return PathKind::line;
  if (name == "circle") return PathKind::circle;
  if (name == "figure_eight" || name == "figure-eight") return PathKind::figure_eight;
  if (name == "lissajous") return PathKind::lissajous;
  if (name == "waypoints") return PathKind::waypoints;
  throw Error(ErrorCode::InvalidArgument, "unknown path kind '" + std::string(name) + "'");
}

const char* to_string(PathKind kind) {
  switch (kind) {
    case PathKind::line: return "line";
    case PathKind::circle: return "circle";
    case PathKind::figure_eight: return "figure_eight";
    case PathKind::lissajous: return "lissajous";
    case PathKind::waypoints: return "waypoints";
  }
  return "?";
}

SurfaceSpec SurfaceSpec::sinusoid_mixture() {
  return {{{0.5, 20.0, 0.0, 0.0}, {0.2, 7.0, 1.1, 0.3}}};
}

double SurfaceSpec::height(double x, double y) const {
  double h = 0.0;
  for (const Sinusoid& s : terms) {
    const double k = kTwoPi / s.wavelength;
    h += s.amplitude * std::sin(k * (std::cos(s.direction) * x + std::sin(s.direction) * y) + s.phase);
  }
  return h;
}

Eigen::Vector2d SurfaceSpec::gradient(double x, double y) const {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const Sinusoid& s : terms) {
    const double k = kTwoPi / s.wavelength;
    const Eigen::Vector2d dir(std::cos(s.direction), std::sin(s.direction));
    g += s.amplitude * k * std::cos(k * dir.dot(Eigen::Vector2d(x, y)) + s.phase) * dir;
  }
  return g;
}

Vec3 SurfaceSpec::normal(double x, double y) const {
  const Eigen::Vector2d g = gradient(x, y);
  return Vec3(-g.x(), -g.y(), 1.0).normalized();
}

void validate(const SimConfig& cfg) {
  if (!(cfg.step_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "step_length must be positive");
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (cfg.num_poses < 2) throw Error(ErrorCode::InvalidArgument, "num_poses must be at least 2");
  if (!(cfg.path.scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "path scale must be positive");
  for (const Sinusoid& s : cfg.surface.terms) {
    if (!(s.wavelength > 0.0)) throw Error(ErrorCode::InvalidArgument, "surface wavelengths must be positive");
  }
  const NoiseSpec& n = cfg.noise;
  if (!(n.level >= 0.0) || !(n.sigma_t >= 0.0) || !(n.sigma_r >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise parameters must be nonnegative");
  }
  if (!cfg.true_calib.is_unit()) throw Error(ErrorCode::NotUnit, "true calibration is not a unit dual quaternion");
}

Trajectory generate_path(const SimConfig& cfg) {
  validate(cfg);
  const std::vector<PlanarSample> samples = sample_path(cfg);
  Trajectory traj;
  traj.sensor_id = "b";
  traj.poses.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const Vec3 z = cfg.surface.normal(s.p.x(), s.p.y());
    const Vec3 tau(s.dir.x(), s.dir.y(), 0.0);
    const Vec3 x = (tau - tau.dot(z) * z).normalized();
    const Vec3 y = z.cross(x);
    Mat4 T = Mat4::Identity();
    T.block<3, 1>(0, 0) = x;
    T.block<3, 1>(0, 1) = y;
    T.block<3, 1>(0, 2) = z;
    T.block<3, 1>(0, 3) = Vec3(s.p.x(), s.p.y(), cfg.surface.height(s.p.x(), s.p.y()));
    traj.poses.push_back({static_cast<double>(i) * cfg.dt, DualQuat::from_matrix(T)});
  }
  return traj;
}

std::vector<MotionPair> sensor_pair_motions(const Trajectory& poses, const DualQuat& true_calib) {
  if (poses.poses.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two poses");
  const DualQuat Ti = conjugate(true_calib);
  std::vector<MotionPair> out;
  out.reserve(poses.poses.size() - 1);
  for (std::size_t i = 0; i + 1 < poses.poses.size(); ++i) {
    const DualQuat qb = conjugate(poses.poses[i].pose) * poses.poses[i + 1].pose;
    const DualQuat qa = true_calib * qb * Ti;
    out.push_back(make_motion_pair(qa, qb, poses.poses[i + 1].t));
  }
  return out;
}

NoiseSigmas noise_sigmas(const std::vector<MotionPair>& pairs, const NoiseSpec& noise) {
  NoiseSigmas s;
  if (!noise.relative) {
    s.sigma_t_a = s.sigma_t_b = noise.sigma_t;
    s.sigma_r_a = s.sigma_r_b = noise.sigma_r;
    return s;
  }
  if (pairs.empty() || noise.level == 0.0) return s;
  double ta = 0, ra = 0, tb = 0, rb = 0;
  for (const MotionPair& p : pairs) {
    const RotTrans a = to_rot_trans(p.q_a);
    const RotTrans b = to_rot_trans(p.q_b);
    ta += a.translation.norm();
    ra += a.angle;
    tb += b.translation.norm();
    rb += b.angle;
  }
  const double n = static_cast<double>(pairs.size());
  s.sigma_t_a = noise.level * ta / n;
  s.sigma_r_a = noise.level * ra / n;
  s.sigma_t_b = noise.level * tb / n;
  s.sigma_r_b = noise.level * rb / n;
  return s;
}

std::vector<MotionPair> add_noise(const std::vector<MotionPair>& pairs, const NoiseSpec& noise, std::uint64_t seed) {
  const NoiseSigmas s = noise_sigmas(pairs, noise);
  if (s.sigma_t_a == 0.0 && s.sigma_r_a == 0.0 && s.sigma_t_b == 0.0 && s.sigma_r_b == 0.0) return pairs;
  std::mt19937_64 rng(seed);
  std::vector<MotionPair> out = pairs;
  for (MotionPair& p : out) {
    p.q_a = perturb(p.q_a, s.sigma_t_a, s.sigma_r_a, rng);
    p.q_b = perturb(p.q_b, s.sigma_t_b, s.sigma_r_b, rng);
  }
  return out;
}

DualQuat random_calibration(std::mt19937_64& rng, double min_dist, double max_dist) {
  std::uniform_real_distribution<double> dist(min_dist, max_dist);
  const Quat r = random_rotation(rng);
  const Vec3 dir = random_axis(rng);
  const double len = dist(rng);
  return canonicalize(DualQuat::from_rotation_translation(r, len * dir));
}

SimResult simulate(const SimConfig& cfg) {
  SimResult out;
  out.poses = generate_path(cfg);
  out.clean = sensor_pair_motions(out.poses, cfg.true_calib);
  out.pairs = add_noise(out.clean, cfg.noise, cfg.seed);
  return out;
}

DualQuat SensorRig::calibration() const { return canonicalize(conjugate(mount_a) * mount_b); }

GroundPlane SensorRig::ground_plane_a() const { return ground_plane_in_sensor(mount_a); }
GroundPlane SensorRig::ground_plane_b() const { return ground_plane_in_sensor(mount_b); }

GroundPlane ground_plane_in_sensor(const DualQuat& mount) {
  // Vehicle points x_v = R x + t; the plane e_z . x_v = 0 becomes (R^T e_z) . x + t_z = 0.
  Vec3 n = mount.rotation_matrix().transpose() * Vec3::UnitZ();
  double d = mount.translation().z();
  if (d < 0.0) {
    n = -n;
    d = -d;
  }
  return {n.normalized(), d};
}

std::vector<MotionPair> rig_motions(const Trajectory& vehicle, const SensorRig& rig) {
  if (vehicle.poses.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two poses");
  const DualQuat ia = conjugate(rig.mount_a);
  const DualQuat ib = conjugate(rig.mount_b);
  std::vector<MotionPair> out;
  out.reserve(vehicle.poses.size() - 1);
  for (std::size_t i = 0; i + 1 < vehicle.poses.size(); ++i) {
    const DualQuat v = conjugate(vehicle.poses[i].pose) * vehicle.poses[i + 1].pose;
    out.push_back(make_motion_pair(ia * v * rig.mount_a, ib * v * rig.mount_b, vehicle.poses[i + 1].t));
  }
  return out;
}

}  // namespace dqcalib
