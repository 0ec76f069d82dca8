#pragma once

#include <stdexcept>
#include <string>

namespace hetmem {

enum class ErrorCode {
  OutOfResourceMemory,
  InvalidFree,
  DoubleFree,
  InvalidArgument,
  InvalidFragment,
  IndexOutOfRange,
  InvalidHandle,
  ConfigError,
  UnknownDomain,
  UnsupportedKernel,
  CycleDetected,
  UnschedulableTask,
  NotPowerOfTwo,
  LengthMismatch,
  InvalidScale,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the whole library; the code distinguishes
/// the failure class so embedders can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace hetmem
