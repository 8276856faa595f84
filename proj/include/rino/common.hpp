#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rino {

enum class ErrorCode {
  ShapeMismatch,
  RangeError,
  NotPositiveDefinite,
  ConvergenceFailure,
  NaNGradient,
  DegenerateBasis,
  DomainViolation,
  FingerprintMismatch,
  NewtonDiverged,
  CFLViolation,
  UnsortedGrid,
  EmptyRow,
  EmptyColumn,
  MissingGamma,
  OffGridQuery,
  ZeroSignal,
  RankDeficient,
  IoError,
  ConfigError,
};

const char* error_name(ErrorCode code);

// Single exception type carrying a machine-checkable code.
struct Error : std::runtime_error {
  ErrorCode code;
  Error(ErrorCode c, const std::string& msg)
      : std::runtime_error(std::string(error_name(c)) + ": " + msg), code(c) {}
};

// Axis-aligned domain box.
struct Box {
  int dim = 1;
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unit(int d);
  bool contains(const double* x, double tol = 1e-9) const;
};

}  // namespace rino
