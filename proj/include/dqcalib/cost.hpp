#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "dqcalib/constraints.hpp"
#include "dqcalib/dualquat.hpp"
#include "dqcalib/planar.hpp"

namespace dqcalib {

/// One synchronized pair of incremental sensor motions. The calibration q_T
/// satisfies q_a q_T = q_T q_b for noise-free data.
struct MotionPair {
  DualQuat q_a;
  DualQuat q_b;
  double timestamp = 0.0;
  /// Per-residual-coordinate weights w_1..w_8; W = diag(sqrt(w)).
  std::array<double, 8> weights{1, 1, 1, 1, 1, 1, 1, 1};
  /// Relative step weight; unset means uniform.
  std::optional<double> eta;
};

/// Repairs near-unit inputs (within kRepairTol) and canonicalizes both motions.
MotionPair make_motion_pair(const DualQuat& q_a, const DualQuat& q_b, double timestamp);

/// Q_w = (R(q_b) - L(q_a))^T W^T W (R(q_b) - L(q_a)). Throws InvalidWeight for negative weights.
Mat8 pair_cost_matrix(const MotionPair& pair);

/// Running sum of per-pair cost matrices. normalized() divides by the sum of the
/// step weights, so that sum(eta_i) = 1 and the cost scale does not depend on n.
class CostAccumulator {
 public:
  explicit CostAccumulator(ConstraintMode mode = ConstraintMode::full3D,
                           std::optional<PlaneAlignment> planes = std::nullopt);

  /// Adds one pair; in planar mode with planes set, both motions are first
  /// projected into the plane-aligned frames.
  void add(const MotionPair& pair);

  Mat8 normalized() const;
  double cost(const Vec8& q) const;

  const Mat8& sum() const { return sum_; }
  std::size_t count() const { return n_; }
  double eta_sum() const { return eta_sum_; }
  ConstraintMode mode() const { return mode_; }
  const std::optional<PlaneAlignment>& planes() const { return planes_; }

 private:
  Mat8 sum_ = Mat8::Zero();
  std::size_t n_ = 0;
  double eta_sum_ = 0.0;
  ConstraintMode mode_;
  std::optional<PlaneAlignment> planes_;
};

/// Value-semantics wrapper around CostAccumulator::add.
CostAccumulator accumulate(CostAccumulator acc, const MotionPair& pair);

/// q^T normalized_Q q; zero for an empty accumulator.
double cost_value(const CostAccumulator& acc, const Vec8& q);

}  // namespace dqcalib
