#pragma once

#include <stdexcept>
#include <string>

namespace qsalg {

enum class ErrorCode {
  DegenerateAlignment,
  ZeroVector,
  NotHermitian,
  PrecisionExhausted,
  NoPositiveEigenvector,
  UnsupportedDomain,
  IncompleteAssignment,
  NotUnital,
  DimensionMismatch,
  BadGrouping,
  LetterOutOfRange,
  NuOutOfRange,
  InfeasibleParameters,
  CapExceeded,
  UsageError,
  DivisionByZero,
  ParseError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DegenerateAlignment: return "DegenerateAlignment";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::NoPositiveEigenvector: return "NoPositiveEigenvector";
    case ErrorCode::UnsupportedDomain: return "UnsupportedDomain";
    case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::NotUnital: return "NotUnital";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadGrouping: return "BadGrouping";
    case ErrorCode::LetterOutOfRange: return "LetterOutOfRange";
    case ErrorCode::NuOutOfRange: return "NuOutOfRange";
    case ErrorCode::InfeasibleParameters: return "InfeasibleParameters";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace qsalg
