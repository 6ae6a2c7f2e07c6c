#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dqcalib {

enum class ErrorCode {
  NonUnitAxis,
  NotUnit,
  InvalidWeight,
  InvalidArgument,
  DegenerateInit,
  Infeasible,
  MaxIterExceeded,
  NonUniqueSolution,
  NoNullSpace,
  EmptyData,
  InfeasiblePoint,
  DegenerateInput,
  DegeneratePath,
  NonMonotonicTime,
  ParseError,
  NonOrthogonalRotation,
  NoOverlap,
};

const char* to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the file readers; carries the 1-based line that failed (0 if unknown).
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The dual optimum admits more than one feasible primal point. The basis spans the
/// null space of Z(lambda) that could not be reduced to a single calibration.
class NonUniqueSolutionError : public Error {
 public:
  NonUniqueSolutionError(Eigen::MatrixXd null_basis, const std::string& what)
      : Error(ErrorCode::NonUniqueSolution, what), null_basis_(std::move(null_basis)) {}

  const Eigen::MatrixXd& null_basis() const noexcept { return null_basis_; }

 private:
  Eigen::MatrixXd null_basis_;
};

}  // namespace dqcalib
