#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "dqcalib/cost.hpp"
#include "dqcalib/dualquat.hpp"
#include "dqcalib/planar.hpp"
#include "dqcalib/trajectory.hpp"

namespace dqcalib {

enum class PathKind { line, circle, figure_eight, lissajous, waypoints };

PathKind parse_path_kind(std::string_view name);
const char* to_string(PathKind kind);

/// 2D path in the xy-plane, sampled at equal arc length.
struct PathSpec {
  PathKind kind = PathKind::circle;
  double scale = 10.0;  // circle radius / curve half-extent, meters
  std::vector<Eigen::Vector2d> waypoints;  // PathKind::waypoints only
};

/// One term a * sin(2 pi (k . p) / wavelength + phase) of the height field.
struct Sinusoid {
  double amplitude = 0.0;
  double wavelength = 1.0;
  double direction = 0.0;  // angle of k in the xy-plane, radians
  double phase = 0.0;
};

/// Height field z = h(x, y); an empty list is the flat plane z = 0.
struct SurfaceSpec {
  std::vector<Sinusoid> terms;

  static SurfaceSpec flat() { return {}; }
  /// Two sinusoids with amplitudes 0.5 m / 0.2 m and wavelengths 20 m / 7 m.
  static SurfaceSpec sinusoid_mixture();

  double height(double x, double y) const;
  Eigen::Vector2d gradient(double x, double y) const;
  /// Upward unit normal.
  Vec3 normal(double x, double y) const;
};

struct NoiseSpec {
  /// Relative mode: sigma = level * mean per-step translation / rotation of
  /// each noise-free sensor stream. Absolute mode uses sigma_t and sigma_r.
  bool relative = true;
  double level = 0.0;
  double sigma_t = 0.0;  // meters
  double sigma_r = 0.0;  // radians
};

struct SimConfig {
  PathSpec path;
  SurfaceSpec surface = SurfaceSpec::sinusoid_mixture();
  double step_length = 1.0;  // meters between poses
  int num_poses = 101;
  double dt = 0.1;           // seconds between poses
  DualQuat true_calib;
  NoiseSpec noise;
  std::uint64_t seed = 0;
};

/// Validates the configuration (InvalidArgument).
void validate(const SimConfig& cfg);

/// Poses following the path on the surface: z axis along the surface normal,
/// x axis along the horizontal path tangent (Gram-Schmidt against the normal).
/// Throws DegeneratePath if consecutive waypoints coincide.
Trajectory generate_path(const SimConfig& cfg);

/// q_b = P_i^-1 P_{i+1} for the poses P of sensor b and q_a = q_T q_b q_T^-1,
/// so q_a q_T = q_T q_b holds up to roundoff.
std::vector<MotionPair> sensor_pair_motions(const Trajectory& poses, const DualQuat& true_calib);

struct NoiseSigmas {
  double sigma_t_a = 0.0, sigma_r_a = 0.0;
  double sigma_t_b = 0.0, sigma_r_b = 0.0;
};

/// Standard deviations that add_noise applies to each stream.
NoiseSigmas noise_sigmas(const std::vector<MotionPair>& pairs, const NoiseSpec& noise);

/// Left-multiplies each motion by a random perturbation: rotation about a
/// uniformly distributed axis by an angle ~ N(0, sigma_r), translation ~ N(0, sigma_t I).
/// A zero noise level returns the input unchanged.
std::vector<MotionPair> add_noise(const std::vector<MotionPair>& pairs, const NoiseSpec& noise, std::uint64_t seed);

/// Random displacement with translation length uniform in [min_dist, max_dist]
/// and uniformly distributed orientation.
DualQuat random_calibration(std::mt19937_64& rng, double min_dist = 2.0, double max_dist = 8.0);

struct SimResult {
  Trajectory poses;
  std::vector<MotionPair> clean;
  std::vector<MotionPair> pairs;  // with noise
};

SimResult simulate(const SimConfig& cfg);

/// Two sensors rigidly mounted on a vehicle. mount_x maps sensor coordinates
/// into vehicle coordinates; the calibration is mount_a^-1 mount_b.
struct SensorRig {
  DualQuat mount_a;
  DualQuat mount_b;

  DualQuat calibration() const;
  /// Vehicle ground plane z = 0 expressed in a sensor frame.
  GroundPlane ground_plane_a() const;
  GroundPlane ground_plane_b() const;
};

/// Ground plane z = 0 of the vehicle frame seen from a sensor with the given mount.
GroundPlane ground_plane_in_sensor(const DualQuat& mount);

/// Motion pairs of a rig following the vehicle poses.
std::vector<MotionPair> rig_motions(const Trajectory& vehicle, const SensorRig& rig);

}  // namespace dqcalib
