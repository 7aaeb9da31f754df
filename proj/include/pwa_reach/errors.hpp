#pragma once

#include <stdexcept>
#include <string>

namespace pwa_reach {

enum class ErrorCode {
  DimensionMismatch,
  ZeroNormal,
  InvalidAlpha,
  NotContinuous,
  NotHurwitz,
  EmptyLevelSet,
  DimensionUnsupported,
  NonFiniteState,
  AuditFailed,
  AllInfeasible,
  ParseError,
  IoError,
};

/// Library-wide exception type; `code()` maps to the CLI's machine-readable
/// error classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

  const char* code_name() const {
    switch (code_) {
      case ErrorCode::DimensionMismatch: return "dimension-mismatch";
      case ErrorCode::ZeroNormal: return "zero-normal";
      case ErrorCode::InvalidAlpha: return "invalid-alpha";
      case ErrorCode::NotContinuous: return "continuity";
      case ErrorCode::NotHurwitz: return "hurwitz";
      case ErrorCode::EmptyLevelSet: return "empty-level-set";
      case ErrorCode::DimensionUnsupported: return "dimension-unsupported";
      case ErrorCode::NonFiniteState: return "non-finite-state";
      case ErrorCode::AuditFailed: return "audit-failed";
      case ErrorCode::AllInfeasible: return "infeasible";
      case ErrorCode::ParseError: return "parse";
      case ErrorCode::IoError: return "io";
    }
    return "unknown";
  }

 private:
  ErrorCode code_;
};

}  // namespace pwa_reach
