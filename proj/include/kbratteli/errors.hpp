#pragma once

#include <stdexcept>
#include <string>

namespace kbratteli {

// Error taxonomy. Each code belongs to one of three categories, which the
// CLI maps onto process exit codes (validation = 1, numeric = 2, resource = 3).
enum class ErrorCode {
  // validation
  NonCommuting,
  NegativeOrNonIntegerEntry,
  SourceVertex,
  NotStronglyConnected,
  DeltaOutOfRange,
  HypothesisViolated,
  DepthMismatch,
  OutsideHalfPlane,
  NotSquarePath,
  EmptyExt1,
  InvalidPath,
  ParseError,
  SchemaError,
  // numeric
  NoConvergence,
  InconsistentEigenvector,
  RefinementFailure,
  // resource
  Overflow,
  TooLarge,
};

enum class ErrorCategory { Validation = 1, Numeric = 2, Resource = 3 };

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonCommuting: return "NonCommuting";
    case ErrorCode::NegativeOrNonIntegerEntry: return "NegativeOrNonIntegerEntry";
    case ErrorCode::SourceVertex: return "SourceVertex";
    case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::DeltaOutOfRange: return "DeltaOutOfRange";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::DepthMismatch: return "DepthMismatch";
    case ErrorCode::OutsideHalfPlane: return "OutsideHalfPlane";
    case ErrorCode::NotSquarePath: return "NotSquarePath";
    case ErrorCode::EmptyExt1: return "EmptyExt1";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::InconsistentEigenvector: return "InconsistentEigenvector";
    case ErrorCode::RefinementFailure: return "RefinementFailure";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

inline ErrorCategory error_category(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoConvergence:
    case ErrorCode::InconsistentEigenvector:
    case ErrorCode::RefinementFailure:
      return ErrorCategory::Numeric;
    case ErrorCode::Overflow:
    case ErrorCode::TooLarge:
      return ErrorCategory::Resource;
    default:
      return ErrorCategory::Validation;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return error_category(code_); }

 private:
  ErrorCode code_;
};

}  // namespace kbratteli
