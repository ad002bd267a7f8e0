#pragma once

#include <stdexcept>
#include <string>

namespace khintmart {

enum class ErrorCode {
  NonMonotoneBreakpoints,
  BadEndpoints,
  AtomIndexOutOfRange,
  BadCoefficientCount,
  NotSymmetric,
  NotProbability,
  UnknownCell,
  NotDyadic,
  TrivialSystem,
  DomainError,
  SizeLimit,
  NotMeanZero,
  NotKMinus1Dyadic,
  ZeroEnvelopeCell,
  NotIP,
  EmptySignClass,
  NotMRademacher,
  NotPrepared,
  Infeasible,
  InvalidSystem,
  ParseError,
  CeilingViolation,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonMonotoneBreakpoints: return "NonMonotoneBreakpoints";
    case ErrorCode::BadEndpoints: return "BadEndpoints";
    case ErrorCode::AtomIndexOutOfRange: return "AtomIndexOutOfRange";
    case ErrorCode::BadCoefficientCount: return "BadCoefficientCount";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotProbability: return "NotProbability";
    case ErrorCode::UnknownCell: return "UnknownCell";
    case ErrorCode::NotDyadic: return "NotDyadic";
    case ErrorCode::TrivialSystem: return "TrivialSystem";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SizeLimit: return "SizeLimit";
    case ErrorCode::NotMeanZero: return "NotMeanZero";
    case ErrorCode::NotKMinus1Dyadic: return "NotKMinus1Dyadic";
    case ErrorCode::ZeroEnvelopeCell: return "ZeroEnvelopeCell";
    case ErrorCode::NotIP: return "NotIP";
    case ErrorCode::EmptySignClass: return "EmptySignClass";
    case ErrorCode::NotMRademacher: return "NotMRademacher";
    case ErrorCode::NotPrepared: return "NotPrepared";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InvalidSystem: return "InvalidSystem";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CeilingViolation: return "CeilingViolation";
  }
  return "Unknown";
}

/// Library-wide exception carrying a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace khintmart
