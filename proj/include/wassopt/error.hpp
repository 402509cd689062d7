#pragma once

#include <stdexcept>
#include <string>

namespace wassopt {

// Machine-readable error taxonomy. Every domain failure carries one of these
// codes so the CLI can map it to a stable diagnostic name and exit code.
enum class ErrorCode {
  InvalidMeasure,
  DimensionMismatch,
  MixedRepresentation,
  NonFiniteImage,
  NonInvertible,
  TOutOfRange,
  IncompatibleRepresentation,
  NondeterministicMap,
  ZeroStd,
  StepTooLarge,
  DegenerateConstraintGradient,
  NonFiniteIterate,
  NoValidRoot,
  MultipleValidRoots,
  NonpositiveLambda,
  NoConvergence,
  TooLarge,
  ParseError,
};

inline const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MixedRepresentation: return "MixedRepresentation";
    case ErrorCode::NonFiniteImage: return "NonFiniteImage";
    case ErrorCode::NonInvertible: return "NonInvertible";
    case ErrorCode::TOutOfRange: return "TOutOfRange";
    case ErrorCode::IncompatibleRepresentation: return "IncompatibleRepresentation";
    case ErrorCode::NondeterministicMap: return "NondeterministicMap";
    case ErrorCode::ZeroStd: return "ZeroStd";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::DegenerateConstraintGradient: return "DegenerateConstraintGradient";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::NoValidRoot: return "NoValidRoot";
    case ErrorCode::MultipleValidRoots: return "MultipleValidRoots";
    case ErrorCode::NonpositiveLambda: return "NonpositiveLambda";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace wassopt
