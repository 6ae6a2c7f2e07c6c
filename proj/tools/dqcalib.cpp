// dqcalib: extrinsic calibration from per-sensor ego-motion.
//
// Exit codes: 0 ok, 1 solver failure, 2 bad input or configuration,
// 3 degenerate data (non-unique calibration) or infeasible candidate.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dqcalib/error.hpp"
#include "dqcalib/global_solver.hpp"
#include "dqcalib/io.hpp"
#include "dqcalib/local_solver.hpp"
#include "dqcalib/metrics.hpp"
#include "dqcalib/online.hpp"
#include "dqcalib/planar.hpp"
#include "dqcalib/sim.hpp"
#include "dqcalib/study.hpp"
#include "dqcalib/verify.hpp"

using namespace dqcalib;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

// Invalid user input discovered after CLI parsing; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::optional<std::uint64_t> seed;
  std::string mode = "3d";
  double gap_threshold = 1e-6;
  std::string output = "text";

  ConstraintMode constraint_mode() const { return mode == "planar" ? ConstraintMode::planar : ConstraintMode::full3D; }
};

std::vector<double> parse_csv_numbers(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": '" + tok + "' is not a number");
    }
  }
  return v;
}

Vec8 parse_q8(const std::string& s, const char* what) {
  const std::vector<double> v = parse_csv_numbers(s, what);
  if (v.size() != 8) throw UsageError(std::string(what) + ": expected 8 comma-separated values");
  return Vec8(v.data());
}

// Unit DQ from a Q8 string; near-unit input is repaired.
DualQuat parse_unit_q8(const std::string& s, const char* what) {
  try {
    return canonicalize(make_unit(DualQuat::from_vec(parse_q8(s, what))));
  } catch (const Error&) {
    throw UsageError(std::string(what) + ": not a unit dual quaternion");
  }
}

// "tx,ty,tz,ax,ay,az,angle" (angle in radians).
DualQuat parse_pose(const std::string& s, const char* what) {
  const std::vector<double> v = parse_csv_numbers(s, what);
  if (v.size() != 7) throw UsageError(std::string(what) + ": expected tx,ty,tz,ax,ay,az,angle");
  const Vec3 axis(v[3], v[4], v[5]);
  if (v[6] != 0.0 && !(axis.norm() > 0.0)) throw UsageError(std::string(what) + ": zero rotation axis");
  return from_rot_trans(v[6] != 0.0 ? Vec3(axis.normalized()) : Vec3::UnitX(), v[6], Vec3(v[0], v[1], v[2]));
}

std::optional<DualQuat> ground_truth(const std::string& q8, const std::string& pose) {
  if (!q8.empty() && !pose.empty()) throw UsageError("--gt and --gt-pose are mutually exclusive");
  if (!q8.empty()) return parse_unit_q8(q8, "--gt");
  if (!pose.empty()) return parse_pose(pose, "--gt-pose");
  return std::nullopt;
}

// A plane file holds either "nx ny nz d" on one line or an xyz point cloud.
GroundPlane load_plane(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError(ErrorCode::ParseError, 0, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ParseError(ErrorCode::ParseError, lineno, "not a number: '" + tok + "'");
      }
    }
    rows.push_back(v);
  }
  if (rows.size() == 1 && rows[0].size() == 4) {
    const Vec3 n(rows[0][0], rows[0][1], rows[0][2]);
    if (std::abs(n.norm() - 1.0) > 1e-6) throw UsageError(path + ": plane normal must be unit length");
    return make_ground_plane(n.normalized(), rows[0][3]);
  }
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 3) throw ParseError(ErrorCode::ParseError, i + 1, path + ": expected 'x y z' points or one 'nx ny nz d' line");
    pts.emplace_back(rows[i][0], rows[i][1], rows[i][2]);
  }
  RansacOptions opts;
  opts.seed = seed;
  return fit_ground_plane(pts, opts);
}

std::optional<PlaneAlignment> load_planes(const Global& g, const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return std::nullopt;
  if (g.constraint_mode() != ConstraintMode::planar) throw UsageError("--plane-a/--plane-b require --mode planar");
  const std::uint64_t seed = g.seed.value_or(0);
  const GroundPlane pa = a.empty() ? GroundPlane{} : load_plane(a, seed);
  const GroundPlane pb = b.empty() ? GroundPlane{} : load_plane(b, seed + 1);
  return PlaneAlignment::from_planes(pa, pb);
}

std::vector<MotionPair> load_pairs_checked(const std::string& path) {
  if (!fs::exists(path)) throw ParseError(ErrorCode::ParseError, 0, "no such file: " + path);
  return load_pairs(path);
}

// Motion pairs come from a JSONL file or from two trajectory files.
struct InputArgs {
  std::string pairs, traj_a, traj_b, format = "tum";
  double max_skew = 0.02;
  double kitti_rate = 10.0;
  bool nearest = false;
};

struct Input {
  std::vector<MotionPair> pairs;
  std::optional<std::size_t> dropped;  // trajectory input only
  std::string source;
};

void add_input_options(CLI::App* cmd, InputArgs& in) {
  auto* pairs = cmd->add_option("--pairs", in.pairs, "motion-pair JSONL file");
  auto* ta = cmd->add_option("--traj-a", in.traj_a, "trajectory of sensor a");
  auto* tb = cmd->add_option("--traj-b", in.traj_b, "trajectory of sensor b");
  ta->needs(tb);
  tb->needs(ta);
  pairs->excludes(ta)->excludes(tb);
  cmd->add_option("--format", in.format, "trajectory file format")->check(CLI::IsMember({"tum", "kitti"}));
  cmd->add_option("--max-skew", in.max_skew, "largest pairing time offset in seconds")->check(CLI::NonNegativeNumber);
  cmd->add_option("--kitti-rate", in.kitti_rate, "KITTI pose rate in Hz")->check(CLI::PositiveNumber);
  cmd->add_flag("--nearest", in.nearest, "pair with the nearest pose instead of interpolating");
}

Input load_input(const InputArgs& in) {
  if (!in.pairs.empty()) return {load_pairs_checked(in.pairs), std::nullopt, in.pairs};
  if (in.traj_a.empty()) throw UsageError("either --pairs or --traj-a/--traj-b is required");
  for (const auto& f : {in.traj_a, in.traj_b}) {
    if (!fs::exists(f)) throw ParseError(ErrorCode::ParseError, 0, "no such file: " + f);
  }
  const TrajectoryFormat fmt = parse_trajectory_format(in.format);
  PairingConfig cfg;
  cfg.max_skew = in.max_skew;
  cfg.interpolate = !in.nearest;
  PairingResult r = pair_streams(load_trajectory(in.traj_a, fmt, in.kitti_rate), load_trajectory(in.traj_b, fmt, in.kitti_rate), cfg);
  return {std::move(r.pairs), r.dropped, in.traj_a + " + " + in.traj_b};
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json dq_json(const DualQuat& q) {
  const RotTrans rt = to_rot_trans(q);
  return {{"q", vec_json(q.vec())},
          {"axis", vec_json(rt.axis)},
          {"angle_deg", rt.angle * kDeg},
          {"translation", vec_json(rt.translation)}};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Full precision for machine-readable output, 10 digits for text.
int g_digits = 17;

std::string fmt(double v) {
  if (g_digits == 17) return format_double(v);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", g_digits, v);
  return buf;
}

std::string join(const Eigen::VectorXd& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  InputArgs input;
  std::string plane_a, plane_b, solver = "global", init, gt, gt_pose;
  int repeat = 10;
};

struct SolverReport {
  std::string solver;
  CalibSolution sol;
  double time_ms = 0.0;
  int iterations = 0;
  bool converged = true;
};

int run_calibrate(const Global& g, const CalibrateArgs& a) {
  if (a.repeat < 1) throw UsageError("--repeat must be at least 1");
  const std::optional<DualQuat> gt = ground_truth(a.gt, a.gt_pose);
  std::optional<Vec8> init;
  if (!a.init.empty()) init = parse_q8(a.init, "--init");
  const Input input = load_input(a.input);
  const auto& pairs = input.pairs;
  const auto planes = load_planes(g, a.plane_a, a.plane_b);
  const ConstraintMode mode = g.constraint_mode();

  CostAccumulator acc(mode, planes);
  for (const auto& p : pairs) acc.add(p);
  if (acc.count() == 0) throw Error(ErrorCode::EmptyData, "no motion pairs in " + input.source);
  const Mat8 Q = acc.normalized();

  auto lift = [&](const DualQuat& q) {
    return (mode == ConstraintMode::planar && planes) ? lift_calibration(q, planes->a, planes->b) : q;
  };

  std::vector<SolverReport> reports;
  if (a.solver == "global" || a.solver == "both") {
    GlobalOptions opts;
    opts.gap_threshold = g.gap_threshold;
    std::vector<double> times;
    SolverReport r{"global", {}, 0.0, 0, true};
    for (int i = 0; i < a.repeat; ++i) {
      r.sol = solve_global(acc, opts);
      times.push_back(r.sol.solve_time * 1e3);
    }
    r.time_ms = median(times);
    reports.push_back(r);
  }
  if (a.solver == "fast" || a.solver == "both") {
    LocalSolveOptions lopts;
    if (init) {
      // --init is a 3D calibration; the solver works in the plane-aligned frames.
      Vec8 q0 = *init;
      if (mode == ConstraintMode::planar && planes) {
        q0 = project_calibration(canonicalize(make_unit(DualQuat::from_vec(q0), 1e-3)), planes->a, planes->b).vec();
      }
      lopts.init = q0;
    }
    std::vector<double> times;
    LocalSolution ls;
    for (int i = 0; i < a.repeat; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      ls = solve_local(Q, mode, lopts);
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    CertifyOptions copts;
    copts.gap_threshold = g.gap_threshold;
    const Certificate cert = certify(Q, ls.q_hat, mode, copts);
    SolverReport r{"fast", {}, median(times), ls.iterations, ls.converged};
    const DualQuat q = DualQuat::from_vec(ls.q_hat);
    r.sol.q_hat = lift(q);
    if (mode == ConstraintMode::planar) r.sol.q_hat_planar = q;
    r.sol.plane_derived = mode == ConstraintMode::planar && planes.has_value();
    r.sol.lambda = cert.lambda_fit;
    r.sol.primal_cost = cert.cost;
    r.sol.dual_value = cert.lambda_fit[0];
    r.sol.gap = cert.gap;
    r.sol.is_global = cert.is_global;
    r.sol.provenance = Provenance::local;
    reports.push_back(r);
  }

  json out = {{"pairs", pairs.size()}, {"mode", to_string(mode)}, {"results", json::array()}};
  if (input.dropped) out["dropped_pairs"] = *input.dropped;
  for (const auto& r : reports) {
    json j = dq_json(r.sol.q_hat);
    j["solver"] = r.solver;
    j["cost"] = r.sol.primal_cost;
    j["dual_value"] = r.sol.dual_value;
    j["gap"] = r.sol.gap;
    j["is_global"] = r.sol.is_global;
    j["time_ms"] = r.time_ms;
    j["plane_derived"] = r.sol.plane_derived;
    if (r.solver == "global") j["null_dim"] = r.sol.null_dim;
    if (r.solver == "fast") {
      j["iterations"] = r.iterations;
      j["converged"] = r.converged;
    }
    if (gt) {
      const CalibError e = calib_error(r.sol.q_hat, *gt);
      j["eps_r_deg"] = e.eps_r * kDeg;
      j["eps_t_m"] = e.eps_t;
    }
    out["results"].push_back(j);
  }
  if (reports.size() == 2) {
    const CalibError e = calib_error(reports[0].sol.q_hat, reports[1].sol.q_hat);
    out["agreement"] = {{"eps_r_deg", e.eps_r * kDeg}, {"eps_t_m", e.eps_t}};
  }

  if (g.output == "json") {
    std::cout << out.dump(2) << "\n";
  } else if (g.output == "csv") {
    std::cout << "solver,q1,q2,q3,q4,q5,q6,q7,q8,cost,gap,is_global,time_ms,eps_r_deg,eps_t_m\n";
    for (const auto& j : out["results"]) {
      std::cout << j["solver"].get<std::string>();
      for (double x : j["q"]) std::cout << ',' << fmt(x);
      std::cout << ',' << fmt(j["cost"]) << ',' << fmt(j["gap"]) << ',' << (j["is_global"].get<bool>() ? 1 : 0) << ','
                << fmt(j["time_ms"]) << ',' << (j.contains("eps_r_deg") ? fmt(j["eps_r_deg"]) : "") << ','
                << (j.contains("eps_t_m") ? fmt(j["eps_t_m"]) : "") << '\n';
    }
  } else {
    std::cout << "pairs: " << pairs.size();
    if (input.dropped) std::cout << " (" << *input.dropped << " dropped for time skew)";
    std::cout << "  mode: " << to_string(mode) << "\n";
    for (const auto& j : out["results"]) {
      std::cout << "[" << j["solver"].get<std::string>() << "]\n";
      std::cout << "  q:           " << join(Eigen::Map<const Vec8>(j["q"].get<std::vector<double>>().data())) << "\n";
      const auto axis = j["axis"].get<std::vector<double>>();
      const auto t = j["translation"].get<std::vector<double>>();
      std::cout << "  rotation:    " << fmt(j["angle_deg"]) << " deg about (" << fmt(axis[0]) << ", " << fmt(axis[1]) << ", "
                << fmt(axis[2]) << ")\n";
      std::cout << "  translation: (" << fmt(t[0]) << ", " << fmt(t[1]) << ", " << fmt(t[2]) << ") m\n";
      std::cout << "  cost:        " << fmt(j["cost"]) << "\n";
      std::cout << "  gap:         " << fmt(j["gap"]) << "\n";
      std::cout << "  is_global:   " << (j["is_global"].get<bool>() ? "true" : "false") << "\n";
      std::cout << "  time:        " << fmt(j["time_ms"]) << " ms (median of " << a.repeat << ")\n";
      if (j["plane_derived"].get<bool>()) std::cout << "  z, roll, pitch taken from the ground planes\n";
      if (j.contains("eps_r_deg")) {
        std::cout << "  eps_r:       " << fmt(j["eps_r_deg"]) << " deg\n";
        std::cout << "  eps_t:       " << fmt(j["eps_t_m"]) << " m\n";
      }
    }
    if (out.contains("agreement")) {
      std::cout << "agreement: " << fmt(out["agreement"]["eps_r_deg"]) << " deg, " << fmt(out["agreement"]["eps_t_m"]) << " m\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------- online

struct OnlineArgs {
  InputArgs input;
  std::string plane_a, plane_b, gt, gt_pose;
  double t_no_fail = 5.0;
};

int run_online(const Global& g, const OnlineArgs& a) {
  if (!(a.t_no_fail >= 0.0)) throw UsageError("--t-no-fail must be nonnegative");
  const std::optional<DualQuat> gt = ground_truth(a.gt, a.gt_pose);
  const Input input = load_input(a.input);
  const auto& pairs = input.pairs;
  OnlineConfig cfg;
  cfg.mode = g.constraint_mode();
  cfg.t_no_fail = a.t_no_fail;
  cfg.gap_threshold = g.gap_threshold;
  if (!a.plane_a.empty() || !a.plane_b.empty()) {
    if (cfg.mode != ConstraintMode::planar) throw UsageError("--plane-a/--plane-b require --mode planar");
    const std::uint64_t seed = g.seed.value_or(0);
    if (!a.plane_a.empty()) cfg.plane_a = load_plane(a.plane_a, seed);
    if (!a.plane_b.empty()) cfg.plane_b = load_plane(a.plane_b, seed + 1);
  }
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (!(pairs[i].timestamp > pairs[i - 1].timestamp)) {
      throw Error(ErrorCode::NonMonotonicTime, "timestamps must increase strictly (pair " + std::to_string(i + 1) + ")");
    }
  }

  OnlineCalibrator cal(cfg);
  json steps = json::array();
  int switches = 0;
  std::optional<Provenance> prev;
  const bool csv = g.output != "json";
  if (csv) std::cout << "t,eps_r_deg,eps_t_m,gap,provenance,time_ms\n";
  CalibSolution last;
  for (const auto& p : pairs) {
    last = cal.update(p);
    if (prev && *prev == Provenance::global && last.provenance == Provenance::local) ++switches;
    prev = last.provenance;
    std::optional<CalibError> e;
    if (gt) e = calib_error(last.q_hat, *gt);
    const double ms = last.solve_time * 1e3;
    if (csv) {
      std::cout << fmt(p.timestamp) << ',' << (e ? fmt(e->eps_r * kDeg) : "") << ',' << (e ? fmt(e->eps_t) : "") << ','
                << fmt(last.gap) << ',' << to_string(last.provenance) << (last.degenerate ? "-degenerate" : "") << ','
                << fmt(ms) << '\n';
    } else {
      json s = {{"t", p.timestamp}, {"gap", last.gap}, {"provenance", to_string(last.provenance)},
                {"is_global", last.is_global}, {"degenerate", last.degenerate}, {"time_ms", ms}};
      if (e) {
        s["eps_r_deg"] = e->eps_r * kDeg;
        s["eps_t_m"] = e->eps_t;
      }
      steps.push_back(s);
    }
  }
  json summary = {{"steps", pairs.size()}, {"switches_to_local", switches}};
  if (input.dropped) summary["dropped_pairs"] = *input.dropped;
  if (!pairs.empty()) {
    summary["final"] = dq_json(last.q_hat);
    summary["final"]["is_global"] = last.is_global;
    summary["final"]["gap"] = last.gap;
    if (gt) {
      const CalibError e = calib_error(last.q_hat, *gt);
      summary["final"]["eps_r_deg"] = e.eps_r * kDeg;
      summary["final"]["eps_t_m"] = e.eps_t;
    }
  }
  if (csv) {
    std::cout << "# steps=" << pairs.size() << " switches_to_local=" << switches;
    if (input.dropped) std::cout << " dropped_pairs=" << *input.dropped;
    if (!pairs.empty()) {
      std::cout << " final_q=" << join(last.q_hat.vec()) << " is_global=" << (last.is_global ? "true" : "false");
      if (gt) std::cout << " eps_r_deg=" << fmt(summary["final"]["eps_r_deg"]) << " eps_t_m=" << fmt(summary["final"]["eps_t_m"]);
    }
    std::cout << "\n";
  } else {
    std::cout << json{{"steps", steps}, {"summary", summary}}.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- simulate / study

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ErrorCode::ParseError, 0, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

PathSpec parse_path(const json& j) {
  PathSpec p;
  if (j.is_string()) {
    p.kind = parse_path_kind(j.get<std::string>());
    return p;
  }
  p.kind = parse_path_kind(j.value("kind", std::string("circle")));
  p.scale = j.value("scale", p.scale);
  if (j.contains("waypoints")) {
    for (const auto& w : j["waypoints"]) {
      if (!w.is_array() || w.size() != 2) throw UsageError("waypoints must be [x, y] pairs");
      p.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>());
    }
  }
  return p;
}

SurfaceSpec parse_surface(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "flat") return SurfaceSpec::flat();
    if (s == "sinusoid" || s == "sinusoid_mixture") return SurfaceSpec::sinusoid_mixture();
    throw UsageError("unknown surface '" + s + "'");
  }
  SurfaceSpec s;
  for (const auto& t : j.at("terms")) {
    s.terms.push_back({t.at("amplitude").get<double>(), t.at("wavelength").get<double>(), t.value("direction", 0.0),
                       t.value("phase", 0.0)});
  }
  return s;
}

DualQuat parse_calib(const json& j, std::mt19937_64& rng) {
  if (j.is_string() && j.get<std::string>() == "random") return random_calibration(rng);
  if (j.is_array()) {
    if (j.size() != 8) throw UsageError("true_calib must have 8 entries");
    Vec8 v;
    for (int i = 0; i < 8; ++i) v[i] = j[i].get<double>();
    try {
      return canonicalize(make_unit(DualQuat::from_vec(v)));
    } catch (const Error&) {
      throw UsageError("true_calib is not a unit dual quaternion");
    }
  }
  const auto t = j.value("translation", std::vector<double>{0, 0, 0});
  const auto axis = j.value("axis", std::vector<double>{1, 0, 0});
  if (t.size() != 3 || axis.size() != 3) throw UsageError("true_calib translation/axis need 3 entries");
  const double angle = j.value("angle", 0.0);
  Vec3 ax(axis[0], axis[1], axis[2]);
  if (angle != 0.0) ax.normalize();
  return from_rot_trans(ax, angle, Vec3(t[0], t[1], t[2]));
}

SimConfig parse_sim_config(const json& j, const Global& g) {
  try {
    SimConfig cfg;
    cfg.seed = g.seed.value_or(j.value("seed", std::uint64_t{0}));
    std::mt19937_64 rng(cfg.seed ^ 0xC0FFEEULL);
    if (j.contains("path")) cfg.path = parse_path(j["path"]);
    if (j.contains("surface")) cfg.surface = parse_surface(j["surface"]);
    cfg.step_length = j.value("step_length", cfg.step_length);
    cfg.num_poses = j.value("num_poses", cfg.num_poses);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.true_calib = j.contains("true_calib") ? parse_calib(j["true_calib"], rng) : random_calibration(rng);
    if (j.contains("noise")) {
      const json& n = j["noise"];
      if (n.is_number()) {
        cfg.noise.level = n.get<double>();
      } else if (n.contains("level")) {
        cfg.noise.level = n["level"].get<double>();
      } else {
        cfg.noise.relative = false;
        cfg.noise.sigma_t = n.value("sigma_t", 0.0);
        cfg.noise.sigma_r = n.value("sigma_r", 0.0);
      }
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

int run_simulate(const Global& g, const std::string& config, const std::string& out_path) {
  const SimConfig cfg = parse_sim_config(read_json_file(config), g);
  const SimResult res = simulate(cfg);
  save_pairs(out_path, res.pairs);
  const NoiseSigmas s = noise_sigmas(res.clean, cfg.noise);
  json gt = {{"true_calib", vec_json(cfg.true_calib.vec())},
             {"seed", cfg.seed},
             {"pairs", res.pairs.size()},
             {"sigma_t", {s.sigma_t_a, s.sigma_t_b}},
             {"sigma_r", {s.sigma_r_a, s.sigma_r_b}}};
  const std::string sidecar = out_path + ".gt.json";
  std::ofstream(sidecar) << gt.dump(2) << "\n";
  if (g.output == "json") {
    std::cout << json{{"pairs_file", out_path}, {"ground_truth_file", sidecar}, {"pairs", res.pairs.size()}}.dump(2) << "\n";
  } else {
    std::cout << "wrote " << res.pairs.size() << " pairs to " << out_path << "\n";
    std::cout << "ground truth: " << sidecar << "  q_T = " << join(cfg.true_calib.vec()) << "\n";
  }
  return 0;
}

int run_study_cmd(const Global& g, const std::string& config, const std::string& out_path) {
  const json j = read_json_file(config);
  StudyConfig cfg;
  try {
    cfg.noise_levels = j.value("noise_levels", cfg.noise_levels);
    cfg.sizes = j.value("sizes", cfg.sizes);
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.base_seed = g.seed.value_or(j.value("base_seed", cfg.base_seed));
    if (j.contains("path")) cfg.path = parse_path(j["path"]);
    if (j.contains("surface")) cfg.surface = parse_surface(j["surface"]);
    cfg.step_length = j.value("step_length", cfg.step_length);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.threads = j.value("threads", 0u);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (cfg.noise_levels.empty() || cfg.sizes.empty() || cfg.seeds < 1) throw UsageError("config: empty study grid");
  for (int n : cfg.sizes) {
    if (n < 1) throw UsageError("config: sizes must be positive");
  }
  for (double l : cfg.noise_levels) {
    if (!(l >= 0.0)) throw UsageError("config: noise levels must be nonnegative");
  }
  if (!(cfg.step_length > 0.0) || !(cfg.dt > 0.0)) throw UsageError("config: step_length and dt must be positive");

  const auto rows = run_study(cfg);
  {
    std::ofstream out(out_path);
    if (!out) throw UsageError("cannot write " + out_path);
    write_study_csv(out, rows);
  }
  const auto med = median_eps_t(cfg, rows);
  if (g.output == "json") {
    json m = json::array();
    for (std::size_t i = 0; i < cfg.noise_levels.size(); ++i) {
      m.push_back({{"noise_level", cfg.noise_levels[i]}, {"sizes", cfg.sizes}, {"median_eps_t_m", med[i]}});
    }
    std::cout << json{{"rows", rows.size()}, {"csv", out_path}, {"medians", m}}.dump(2) << "\n";
  } else {
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    std::cout << "median eps_t [m] per noise level and size\n";
    std::cout << "noise";
    for (int n : cfg.sizes) std::cout << '\t' << n;
    std::cout << '\n';
    for (std::size_t i = 0; i < cfg.noise_levels.size(); ++i) {
      std::cout << cfg.noise_levels[i];
      for (double v : med[i]) std::cout << '\t' << v;
      std::cout << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------- certify

struct CertifyArgs {
  std::string pairs, candidate, plane_a, plane_b;
};

int run_certify(const Global& g, const CertifyArgs& a) {
  const Vec8 cand = parse_q8(a.candidate, "--candidate");
  const auto pairs = load_pairs_checked(a.pairs);
  const auto planes = load_planes(g, a.plane_a, a.plane_b);
  const ConstraintMode mode = g.constraint_mode();
  CostAccumulator acc(mode, planes);
  for (const auto& p : pairs) acc.add(p);

  Vec8 q = cand;
  if (mode == ConstraintMode::planar && planes) {
    const DualQuat c = DualQuat::from_vec(cand);
    if (!c.is_unit(1e-6)) throw Error(ErrorCode::InfeasiblePoint, "candidate is not a unit dual quaternion");
    q = project_calibration(canonicalize(make_unit(c)), planes->a, planes->b).vec();
  }
  CertifyOptions opts;
  opts.gap_threshold = g.gap_threshold;
  const auto t0 = std::chrono::steady_clock::now();
  const Certificate c = certify(acc.normalized(), q, mode, opts);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  if (g.output == "json") {
    std::cout << json{{"gap", c.gap},         {"residual", c.residual},       {"min_eig", c.min_eig},
                      {"cost", c.cost},       {"indefinite", c.indefinite},   {"is_global", c.is_global},
                      {"time_ms", ms}}
                     .dump(2)
              << "\n";
  } else if (g.output == "csv") {
    std::cout << "gap,residual,min_eig,cost,is_global,time_ms\n"
              << fmt(c.gap) << ',' << fmt(c.residual) << ',' << fmt(c.min_eig) << ',' << fmt(c.cost) << ','
              << (c.is_global ? 1 : 0) << ',' << fmt(ms) << '\n';
  } else {
    std::cout << "gap:       " << fmt(c.gap) << "\n"
              << "residual:  " << fmt(c.residual) << "\n"
              << "min_eig:   " << fmt(c.min_eig) << (c.indefinite ? "  (indefinite)" : "") << "\n"
              << "is_global: " << (c.is_global ? "true" : "false") << "\n";
  }
  return 0;
}

void report_null_space(const NonUniqueSolutionError& e) {
  std::cerr << "error: " << e.what() << "\n";
  const Eigen::MatrixXd& N = e.null_basis();
  std::cerr << "null space basis (" << N.cols() << " vectors):\n";
  for (int j = 0; j < N.cols(); ++j) std::cerr << "  " << join(N.col(j)) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extrinsic calibration of two sensors from their ego-motion"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "PRNG seed");
  app.add_option("--mode", g.mode, "constraint mode")->check(CLI::IsMember({"3d", "planar"}));
  app.add_option("--gap-threshold", g.gap_threshold, "duality-gap threshold for globality")->check(CLI::PositiveNumber);
  app.add_option("--output", g.output, "output format")->check(CLI::IsMember({"text", "json", "csv"}));

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "estimate the calibration from motion pairs");
  add_input_options(cal, ca.input);
  cal->add_option("--plane-a", ca.plane_a, "ground plane of sensor a (nx ny nz d, or xyz points)");
  cal->add_option("--plane-b", ca.plane_b, "ground plane of sensor b");
  cal->add_option("--solver", ca.solver, "solver")->check(CLI::IsMember({"global", "fast", "both"}));
  cal->add_option("--init", ca.init, "initial calibration for the fast solver (8 comma-separated values)");
  cal->add_option("--gt", ca.gt, "ground-truth calibration (8 comma-separated values)");
  cal->add_option("--gt-pose", ca.gt_pose, "ground truth as tx,ty,tz,ax,ay,az,angle");
  cal->add_option("--repeat", ca.repeat, "timing repetitions (median reported)");

  OnlineArgs oa;
  auto* onl = app.add_subcommand("online", "replay pairs through the online calibrator");
  add_input_options(onl, oa.input);
  onl->add_option("--t-no-fail", oa.t_no_fail, "seconds of certified fast solves before skipping the global solver");
  onl->add_option("--plane-a", oa.plane_a, "ground plane of sensor a");
  onl->add_option("--plane-b", oa.plane_b, "ground plane of sensor b");
  onl->add_option("--gt", oa.gt, "ground-truth calibration (8 comma-separated values)");
  onl->add_option("--gt-pose", oa.gt_pose, "ground truth as tx,ty,tz,ax,ay,az,angle");

  std::string sim_config, sim_out;
  auto* sim = app.add_subcommand("simulate", "generate simulated motion pairs");
  sim->add_option("--config", sim_config, "JSON configuration")->required();
  sim->add_option("--out", sim_out, "output JSONL file")->required();

  std::string study_config, study_out;
  auto* st = app.add_subcommand("study", "noise x size x seed simulation study");
  st->add_option("--config", study_config, "JSON configuration")->required();
  st->add_option("--out", study_out, "output CSV file")->required();

  CertifyArgs ce;
  auto* cer = app.add_subcommand("certify", "check whether a candidate calibration is globally optimal");
  cer->add_option("--pairs", ce.pairs, "motion-pair JSONL file")->required();
  cer->add_option("--candidate", ce.candidate, "candidate calibration (8 comma-separated values)")->required();
  cer->add_option("--plane-a", ce.plane_a, "ground plane of sensor a");
  cer->add_option("--plane-b", ce.plane_b, "ground plane of sensor b");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) g.seed = seed;
  if (g.output == "text") g_digits = 10;

  try {
    if (*cal) return run_calibrate(g, ca);
    if (*onl) return run_online(g, oa);
    if (*sim) return run_simulate(g, sim_config, sim_out);
    if (*st) return run_study_cmd(g, study_config, study_out);
    if (*cer) return run_certify(g, ce);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonUniqueSolutionError& e) {
    report_null_space(e);
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::NotUnit:
      case ErrorCode::NonOrthogonalRotation:
      case ErrorCode::NonMonotonicTime:
      case ErrorCode::InvalidArgument:
      case ErrorCode::InvalidWeight:
      case ErrorCode::EmptyData:
        return 2;
      case ErrorCode::InfeasiblePoint:
        return 3;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
