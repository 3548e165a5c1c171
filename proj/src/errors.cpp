#include "quqcd/errors.hpp"

namespace quqcd {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadInput: return "BadInput";
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::NotPsd: return "NotPsd";
    case ErrorKind::TraceNotOne: return "TraceNotOne";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DimensionCapExceeded: return "DimensionCapExceeded";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::UnknownOutcome: return "UnknownOutcome";
    case ErrorKind::NotWarmedUp: return "NotWarmedUp";
    case ErrorKind::NormalizationFailure: return "NormalizationFailure";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::DegenerateScenario: return "DegenerateScenario";
    case ErrorKind::InfiniteDivergence: return "InfiniteDivergence";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadInput:
    case ErrorKind::NonHermitian:
    case ErrorKind::NotPsd:
    case ErrorKind::TraceNotOne:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::DimensionCapExceeded:
    case ErrorKind::LabelMismatch:
    case ErrorKind::RankDeficient:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace quqcd
