#include "eigen_utils.hpp"

namespace dqcalib::detail {

std::vector<int> kept_coordinates(ConstraintMode mode) {
  if (mode == ConstraintMode::planar) return {std::begin(kPlanarReduced), std::end(kPlanarReduced)};
  return {0, 1, 2, 3, 4, 5, 6, 7};
}

std::vector<int> active_multipliers(ConstraintMode mode) {
  if (mode == ConstraintMode::planar) return {0, 1, 3};
  return {0, 1};
}

MatX restrict(const Mat8& M, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  MatX out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = M(idx[i], idx[j]);
  return out;
}

VecX restrict(const Vec8& v, const std::vector<int>& idx) {
  VecX out(static_cast<int>(idx.size()));
  for (int i = 0; i < out.size(); ++i) out[i] = v[idx[i]];
  return out;
}

Vec8 embed(const VecX& v, const std::vector<int>& idx) {
  Vec8 out = Vec8::Zero();
  for (int i = 0; i < v.size(); ++i) out[idx[i]] = v[i];
  return out;
}

double min_eigenvalue(const MatX& M) {
  Eigen::SelfAdjointEigenSolver<MatX> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace dqcalib::detail
