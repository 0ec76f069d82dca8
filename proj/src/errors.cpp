#include "hetmem/errors.hpp"

namespace hetmem {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfResourceMemory: return "OutOfResourceMemory";
    case ErrorCode::InvalidFree: return "InvalidFree";
    case ErrorCode::DoubleFree: return "DoubleFree";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidFragment: return "InvalidFragment";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidHandle: return "InvalidHandle";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::UnsupportedKernel: return "UnsupportedKernel";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnschedulableTask: return "UnschedulableTask";
    case ErrorCode::NotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidScale: return "InvalidScale";
  }
  return "Error";
}

}  // namespace hetmem
