#pragma once

#include <stdexcept>
#include <string>

namespace greenwalk {

// Numeric values are part of the C ABI (see greenwalk.h) and the CLI exit codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kInvalidDimension = 2,
  kGridMismatch = 3,
  kAliasingViolation = 4,
  kDivergentGreenMeasure = 5,
  kUnknownTailParams = 6,
  kNegativeSample = 7,
  kAsymmetricTable = 8,
  kZeroMass = 9,
  kDegenerateFit = 10,
  kTruncationCap = 11,
  kQuadratureFailure = 12,
  kInversionInstability = 13,
  kStepCapExceeded = 14,
  kAdmissibilityFailure = 15,
  kInvalidKernel = 16,
  kNotSupported = 17,
  kConfigError = 18,
  kUnknownExperiment = 19,
  kIoError = 20,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

// Literal messages are only turned into strings on failure.
inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

}  // namespace greenwalk
