#pragma once

#include <optional>
#include <vector>

#include "dqcalib/cost.hpp"
#include "dqcalib/global_solver.hpp"
#include "dqcalib/local_solver.hpp"
#include "dqcalib/planar.hpp"
#include "dqcalib/solution.hpp"
#include "dqcalib/verify.hpp"

namespace dqcalib {

struct OnlineConfig {
  ConstraintMode mode = ConstraintMode::full3D;
  /// Ground planes of sensors a and b (planar mode); motions are projected into
  /// the plane-aligned frames and solutions lifted back to 3D.
  std::optional<GroundPlane> plane_a;
  std::optional<GroundPlane> plane_b;
  /// Stream time the fast solver must stay certified before the global solve is skipped.
  double t_no_fail = 5.0;
  double gap_threshold = 1e-6;
  LocalSolveOptions local;
  DualSolveOptions dual;
  CertifyOptions certify;
};

/// Online calibrator: accumulate, warm-started fast solve, certification, and the
/// global solve as a fallback while the fast solver has failed within t_no_fail.
class OnlineCalibrator {
 public:
  explicit OnlineCalibrator(OnlineConfig cfg = {});

  /// Processes one pair. Throws NonMonotonicTime unless timestamps strictly
  /// increase (the state is left untouched). If the global solver finds the data
  /// degenerate, the fast solution is returned with is_global = false and
  /// degenerate = true.
  CalibSolution update(const MotionPair& pair);

  const CostAccumulator& accumulator() const { return acc_; }
  const std::optional<CalibSolution>& last_solution() const { return last_; }
  std::optional<double> t_last_local_error() const { return t_last_error_; }
  const OnlineConfig& config() const { return cfg_; }

 private:
  OnlineConfig cfg_;
  CostAccumulator acc_;
  std::optional<CalibSolution> last_;
  std::optional<double> t_last_;
  std::optional<double> t_last_error_;
};

/// Feeds a time-ordered stream through a fresh calibrator.
std::vector<CalibSolution> replay(const std::vector<MotionPair>& pairs, const OnlineConfig& cfg);

}  // namespace dqcalib
