#pragma once

#include <stdexcept>
#include <string>

namespace quqcd {

/// Failure taxonomy shared by the whole library. Kinds tagged as validation
/// failures describe rejected inputs (CLI exit code 1); the rest are runtime
/// or numerical faults (CLI exit code 2).
enum class ErrorKind {
  BadInput,
  NonHermitian,
  NotPsd,
  TraceNotOne,
  DimensionMismatch,
  DimensionCapExceeded,
  LabelMismatch,
  RankDeficient,
  UnknownOutcome,
  NotWarmedUp,
  NormalizationFailure,
  CalibrationFailed,
  DegenerateScenario,
  InfiniteDivergence,
  NumericalFailure,
};

const char* to_string(ErrorKind kind);

/// True for kinds that indicate a rejected input rather than a runtime fault.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace quqcd
