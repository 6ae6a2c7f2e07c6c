#include "dqcalib/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <json.hpp>

#include "dqcalib/error.hpp"

namespace dqcalib {

namespace {

using json = nlohmann::json;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ErrorCode::ParseError, 0, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return out;
}

bool skip_line(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

std::vector<double> parse_numbers(const std::string& line, std::size_t lineno) {
  std::istringstream ss(line);
  std::vector<double> v;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(ErrorCode::ParseError, lineno, "not a number: '" + tok + "'");
    }
  }
  return v;
}

DualQuat pose_from_rotation(Mat3 R, const Vec3& t, std::size_t lineno) {
  const double dev = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (dev > 1e-3 || R.determinant() <= 0.0) {
    throw ParseError(ErrorCode::NonOrthogonalRotation, lineno,
                     "rotation block deviates from SO(3) by " + std::to_string(dev));
  }
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  R = svd.matrixU() * svd.matrixV().transpose();
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = R;
  T.topRightCorner<3, 1>() = t;
  return DualQuat::from_matrix(T);
}

void check_time(const Trajectory& traj, double t, std::size_t lineno) {
  if (!std::isfinite(t)) throw ParseError(ErrorCode::ParseError, lineno, "non-finite timestamp");
  if (!traj.poses.empty() && !(t > traj.poses.back().t)) {
    throw ParseError(ErrorCode::NonMonotonicTime, lineno, "timestamps must be strictly increasing");
  }
}

// Unit screw motion raised to the power tau.
DualQuat screw_power(const DualQuat& D, double tau) {
  const DualQuat c = canonicalize(D);  // shorter screw
  const Vec3 t = c.translation();
  const Vec3 v = c.real.vector();
  const double s = v.norm();
  const double theta = 2.0 * std::atan2(s, c.real.w);
  if (s < 1e-12) return DualQuat::from_rotation_translation(Quat::identity(), tau * t);

  const Vec3 n = v / s;
  const Vec3 t_par = n.dot(t) * n;
  const Vec3 t_perp = t - t_par;
  // Point on the screw axis, orthogonal to it.
  const Vec3 p = 0.5 * (t_perp + n.cross(t_perp) / std::tan(0.5 * theta));
  const double half = 0.5 * tau * theta;
  const Quat r{std::cos(half), n.x() * std::sin(half), n.y() * std::sin(half), n.z() * std::sin(half)};
  const Vec3 tt = p - r.rotation_matrix() * p + tau * t_par;
  return DualQuat::from_rotation_translation(r, tt);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TrajectoryFormat parse_trajectory_format(std::string_view name) {
  if (name == "tum") return TrajectoryFormat::tum;
  if (name == "kitti" || name == "kitti_pose") return TrajectoryFormat::kitti_pose;
  throw Error(ErrorCode::InvalidArgument, "unknown trajectory format '" + std::string(name) + "'");
}

Trajectory read_trajectory(std::istream& in, TrajectoryFormat format, double kitti_rate_hz) {
  if (!(kitti_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "KITTI rate must be positive");
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const std::vector<double> v = parse_numbers(line, lineno);
    if (format == TrajectoryFormat::tum) {
      if (v.size() != 8) throw ParseError(ErrorCode::ParseError, lineno, "TUM lines need 8 values");
      Vec4 q(v[7], v[4], v[5], v[6]);  // scalar-last on disk
      const double n = q.norm();
      if (!(std::abs(n - 1.0) <= 1e-3)) {
        throw ParseError(ErrorCode::NotUnit, lineno, "quaternion norm " + std::to_string(n));
      }
      check_time(traj, v[0], lineno);
      const DualQuat pose = canonicalize(
          DualQuat::from_rotation_translation(Quat::from_vec(q / n), Vec3(v[1], v[2], v[3])));
      traj.poses.push_back({v[0], pose});
    } else {
      if (v.size() != 12) throw ParseError(ErrorCode::ParseError, lineno, "KITTI lines need 12 values");
      Mat3 R;
      R << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
      const double t = static_cast<double>(traj.poses.size()) / kitti_rate_hz;
      traj.poses.push_back({t, pose_from_rotation(R, Vec3(v[3], v[7], v[11]), lineno)});
    }
  }
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path, TrajectoryFormat format, double kitti_rate_hz) {
  std::ifstream in = open_in(path);
  Trajectory traj = read_trajectory(in, format, kitti_rate_hz);
  traj.sensor_id = path.stem().string();
  return traj;
}

void write_trajectory(std::ostream& out, const Trajectory& traj, TrajectoryFormat format) {
  for (const TimedPose& p : traj.poses) {
    if (format == TrajectoryFormat::tum) {
      const Vec3 t = p.pose.translation();
      const Quat& r = p.pose.real;
      out << format_double(p.t);
      for (double x : {t.x(), t.y(), t.z(), r.x, r.y, r.z, r.w}) out << ' ' << format_double(x);
    } else {
      const Mat4 T = p.pose.to_matrix();
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) out << (i + j ? " " : "") << format_double(T(i, j));
      }
    }
    out << '\n';
  }
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj, TrajectoryFormat format) {
  std::ofstream out = open_out(path);
  write_trajectory(out, traj, format);
}

std::vector<TimedMotion> relative_motions(const Trajectory& traj) {
  std::vector<TimedMotion> out;
  for (std::size_t i = 0; i + 1 < traj.poses.size(); ++i) {
    const DualQuat m = make_unit(conjugate(traj.poses[i].pose) * traj.poses[i + 1].pose);
    out.push_back({traj.poses[i + 1].t, canonicalize(m)});
  }
  return out;
}

DualQuat sclerp(const DualQuat& a, const DualQuat& b, double tau) {
  if (tau == 0.0) return a;
  if (tau == 1.0) return b;
  return a * screw_power(conjugate(a) * b, tau);
}

DualQuat pose_at(const Trajectory& traj, double t, bool interpolate, double* skew) {
  const auto& P = traj.poses;
  if (P.empty()) throw Error(ErrorCode::EmptyData, "trajectory has no poses");
  const auto it = std::lower_bound(P.begin(), P.end(), t, [](const TimedPose& p, double x) { return p.t < x; });
  auto report = [&](double s) {
    if (skew) *skew = s;
  };
  if (it == P.begin()) {
    report(P.front().t - t);
    return P.front().pose;
  }
  if (it == P.end()) {
    report(t - P.back().t);
    return P.back().pose;
  }
  const TimedPose& hi = *it;
  const TimedPose& lo = *(it - 1);
  if (hi.t == t) {
    report(0.0);
    return hi.pose;
  }
  if (interpolate) {
    report(0.0);
    return sclerp(lo.pose, hi.pose, (t - lo.t) / (hi.t - lo.t));
  }
  if (t - lo.t <= hi.t - t) {
    report(t - lo.t);
    return lo.pose;
  }
  report(hi.t - t);
  return hi.pose;
}

PairingResult pair_streams(const Trajectory& a, const Trajectory& b, const PairingConfig& cfg) {
  if (!(cfg.max_skew >= 0.0)) throw Error(ErrorCode::InvalidArgument, "max_skew must be nonnegative");
  if (a.poses.empty() || b.poses.empty()) throw Error(ErrorCode::EmptyData, "both streams need poses");
  if (a.poses.back().t < b.poses.front().t || b.poses.back().t < a.poses.front().t) {
    throw Error(ErrorCode::NoOverlap, "time ranges of the two streams are disjoint");
  }
  PairingResult out;
  for (std::size_t i = 0; i + 1 < a.poses.size(); ++i) {
    const TimedPose& a0 = a.poses[i];
    const TimedPose& a1 = a.poses[i + 1];
    double s0 = 0.0;
    double s1 = 0.0;
    const DualQuat b0 = pose_at(b, a0.t, cfg.interpolate, &s0);
    const DualQuat b1 = pose_at(b, a1.t, cfg.interpolate, &s1);
    if (std::max(s0, s1) > cfg.max_skew) {
      ++out.dropped;
      continue;
    }
    out.pairs.push_back(make_motion_pair(conjugate(a0.pose) * a1.pose, conjugate(b0) * b1, a1.t));
  }
  return out;
}

void write_pairs(std::ostream& out, const std::vector<MotionPair>& pairs) {
  auto write_vec = [&](const double* v, int n) {
    out << '[';
    for (int i = 0; i < n; ++i) out << (i ? "," : "") << format_double(v[i]);
    out << ']';
  };
  for (const MotionPair& p : pairs) {
    const Vec8 qa = p.q_a.vec();
    const Vec8 qb = p.q_b.vec();
    out << "{\"t\":" << format_double(p.timestamp) << ",\"qa\":";
    write_vec(qa.data(), 8);
    out << ",\"qb\":";
    write_vec(qb.data(), 8);
    if (std::any_of(p.weights.begin(), p.weights.end(), [](double w) { return w != 1.0; })) {
      out << ",\"w\":";
      write_vec(p.weights.data(), 8);
    }
    if (p.eta) out << ",\"eta\":" << format_double(*p.eta);
    out << "}\n";
  }
}

void save_pairs(const std::filesystem::path& path, const std::vector<MotionPair>& pairs) {
  std::ofstream out = open_out(path);
  write_pairs(out, pairs);
}

std::vector<MotionPair> read_pairs(std::istream& in) {
  std::vector<MotionPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  auto read_vec8 = [&](const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 8) {
      throw ParseError(ErrorCode::ParseError, lineno, std::string("field '") + key + "' must be an array of 8 numbers");
    }
    Vec8 v;
    for (int i = 0; i < 8; ++i) {
      if (!j[key][i].is_number()) throw ParseError(ErrorCode::ParseError, lineno, std::string("non-numeric entry in '") + key + "'");
      v[i] = j[key][i].get<double>();
    }
    return v;
  };
  auto read_dq = [&](const json& j, const char* key) {
    const DualQuat q = DualQuat::from_vec(read_vec8(j, key));
    try {
      return canonicalize(make_unit(q, kRepairTol));
    } catch (const Error&) {
      throw ParseError(ErrorCode::NotUnit, lineno, std::string("'") + key + "' is not a unit dual quaternion");
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(ErrorCode::ParseError, lineno, e.what());
    }
    if (!j.is_object() || !j.contains("t") || !j["t"].is_number()) {
      throw ParseError(ErrorCode::ParseError, lineno, "expected an object with numeric 't'");
    }
    MotionPair p;
    p.timestamp = j["t"].get<double>();
    p.q_a = read_dq(j, "qa");
    p.q_b = read_dq(j, "qb");
    if (j.contains("w")) {
      const Vec8 w = read_vec8(j, "w");
      for (int i = 0; i < 8; ++i) {
        if (!(w[i] >= 0.0)) throw ParseError(ErrorCode::InvalidWeight, lineno, "weights must be nonnegative");
        p.weights[i] = w[i];
      }
    }
    if (j.contains("eta")) {
      if (!j["eta"].is_number() || !(j["eta"].get<double>() >= 0.0)) {
        throw ParseError(ErrorCode::InvalidWeight, lineno, "eta must be a nonnegative number");
      }
      p.eta = j["eta"].get<double>();
    }
    pairs.push_back(p);
  }
  return pairs;
}

std::vector<MotionPair> load_pairs(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_pairs(in);
}

std::vector<Vec3> read_points(std::istream& in) {
  std::vector<Vec3> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    const std::vector<double> v = parse_numbers(line, lineno);
    if (v.size() != 3) throw ParseError(ErrorCode::ParseError, lineno, "point lines need 3 values");
    pts.emplace_back(v[0], v[1], v[2]);
  }
  return pts;
}

std::vector<Vec3> load_points(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_points(in);
}

}  // namespace dqcalib
