#include "dqcalib/cost.hpp"

#include <cmath>

#include "dqcalib/error.hpp"

namespace dqcalib {

MotionPair make_motion_pair(const DualQuat& q_a, const DualQuat& q_b, double timestamp) {
  MotionPair p;
  p.q_a = canonicalize(make_unit(q_a));
  p.q_b = canonicalize(make_unit(q_b));
  p.timestamp = timestamp;
  return p;
}

Mat8 pair_cost_matrix(const MotionPair& pair) {
  Eigen::Matrix<double, 8, 1> w;
  for (int i = 0; i < 8; ++i) {
    if (!(pair.weights[i] >= 0.0)) throw Error(ErrorCode::InvalidWeight, "weights must be nonnegative");
    w[i] = pair.weights[i];
  }
  const Mat8 D = right_mat(pair.q_b) - left_mat(pair.q_a);
  // W^T W = diag(w)
  const Mat8 Q = D.transpose() * w.asDiagonal() * D;
  return 0.5 * (Q + Q.transpose());
}

CostAccumulator::CostAccumulator(ConstraintMode mode, std::optional<PlaneAlignment> planes)
    : mode_(mode), planes_(std::move(planes)) {}

void CostAccumulator::add(const MotionPair& pair) {
  double eta = 1.0;
  if (pair.eta) {
    if (!(*pair.eta >= 0.0)) throw Error(ErrorCode::InvalidWeight, "eta must be nonnegative");
    eta = *pair.eta;
  }
  Mat8 Qw;
  if (mode_ == ConstraintMode::planar && planes_) {
    MotionPair projected = pair;
    projected.q_a = project_motion(pair.q_a, planes_->a);
    projected.q_b = project_motion(pair.q_b, planes_->b);
    Qw = pair_cost_matrix(projected);
  } else {
    Qw = pair_cost_matrix(pair);
  }
  sum_ += eta * Qw;
  sum_ = 0.5 * (sum_ + sum_.transpose());
  eta_sum_ += eta;
  ++n_;
}

Mat8 CostAccumulator::normalized() const {
  if (n_ == 0 || eta_sum_ <= 0.0) return Mat8::Zero();
  return sum_ / eta_sum_;
}

double CostAccumulator::cost(const Vec8& q) const { return q.dot(normalized() * q); }

CostAccumulator accumulate(CostAccumulator acc, const MotionPair& pair) {
  acc.add(pair);
  return acc;
}

double cost_value(const CostAccumulator& acc, const Vec8& q) { return acc.cost(q); }

}  // namespace dqcalib
