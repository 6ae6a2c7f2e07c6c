#pragma once

// Small dense helpers shared by the solvers. Not part of the public API.

#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "dqcalib/constraints.hpp"

namespace dqcalib::detail {

using MatX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
using VecX = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;

/// Coordinates kept by the dual and certification routines: all eight for
/// full3D, the six left after substituting q2 = q3 = 0 for planar.
std::vector<int> kept_coordinates(ConstraintMode mode);

/// Multiplier indices that enter the reduced problem (lambda3 is eliminated in planar mode).
std::vector<int> active_multipliers(ConstraintMode mode);

MatX restrict(const Mat8& M, const std::vector<int>& idx);
VecX restrict(const Vec8& v, const std::vector<int>& idx);
Vec8 embed(const VecX& v, const std::vector<int>& idx);

double min_eigenvalue(const MatX& M);

}  // namespace dqcalib::detail
