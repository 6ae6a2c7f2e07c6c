#include "dqcalib/online.hpp"

#include <chrono>
#include <cmath>

#include "dqcalib/error.hpp"

namespace dqcalib {

namespace {

std::optional<PlaneAlignment> alignment(const OnlineConfig& cfg) {
  if (cfg.mode != ConstraintMode::planar || (!cfg.plane_a && !cfg.plane_b)) return std::nullopt;
  return PlaneAlignment::from_planes(cfg.plane_a.value_or(GroundPlane{}), cfg.plane_b.value_or(GroundPlane{}));
}

}  // namespace

const char* to_string(Provenance p) { return p == Provenance::local ? "local" : "global"; }

OnlineCalibrator::OnlineCalibrator(OnlineConfig cfg) : cfg_(std::move(cfg)), acc_(cfg_.mode, alignment(cfg_)) {
  if (!(cfg_.t_no_fail >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t_no_fail must be nonnegative");
}

CalibSolution OnlineCalibrator::update(const MotionPair& pair) {
  const double t = pair.timestamp;
  if (!std::isfinite(t) || (t_last_ && !(t > *t_last_))) {
    throw Error(ErrorCode::NonMonotonicTime, "pair timestamps must be strictly increasing");
  }
  const auto start = std::chrono::steady_clock::now();
  if (!t_last_error_) t_last_error_ = t;
  t_last_ = t;

  acc_.add(pair);
  const Mat8 Q = acc_.normalized();

  // Fast solve, warm-started from the previous estimate in the solver's frame.
  LocalSolveOptions lopts = cfg_.local;
  if (last_) lopts.init = (last_->q_hat_planar ? *last_->q_hat_planar : last_->q_hat).vec();
  const LocalSolution local = solve_local(Q, cfg_.mode, lopts);

  CertifyOptions copts = cfg_.certify;
  copts.gap_threshold = cfg_.gap_threshold;
  const Certificate cert = certify(Q, local.q_hat, cfg_.mode, copts);
  if (!cert.is_global) t_last_error_ = t;

  const bool planar = cfg_.mode == ConstraintMode::planar;
  auto finish = [&](CalibSolution sol) {
    sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    last_ = sol;
    return sol;
  };
  auto from_local = [&] {
    CalibSolution sol;
    const DualQuat q = DualQuat::from_vec(local.q_hat);
    if (planar) {
      sol.q_hat_planar = q;
      sol.q_hat = acc_.planes() ? lift_calibration(q, acc_.planes()->a, acc_.planes()->b) : q;
      sol.plane_derived = acc_.planes().has_value();
    } else {
      sol.q_hat = q;
    }
    sol.lambda = cert.lambda_fit;
    sol.primal_cost = cert.cost;
    sol.dual_value = cert.lambda_fit[0];
    sol.gap = cert.gap;
    sol.is_global = cert.is_global;
    sol.provenance = Provenance::local;
    return sol;
  };

  if (t - *t_last_error_ <= cfg_.t_no_fail) {
    GlobalOptions gopts;
    gopts.dual = cfg_.dual;
    gopts.gap_threshold = cfg_.gap_threshold;
    try {
      return finish(solve_global(acc_, gopts));
    } catch (const NonUniqueSolutionError& e) {
      CalibSolution sol = from_local();
      sol.is_global = false;
      sol.degenerate = true;
      sol.provenance = Provenance::global;
      sol.null_dim = static_cast<int>(e.null_basis().cols());
      return finish(sol);
    }
  }
  return finish(from_local());
}

std::vector<CalibSolution> replay(const std::vector<MotionPair>& pairs, const OnlineConfig& cfg) {
  OnlineCalibrator cal(cfg);
  std::vector<CalibSolution> out;
  out.reserve(pairs.size());
  for (const MotionPair& p : pairs) out.push_back(cal.update(p));
  return out;
}

}  // namespace dqcalib
