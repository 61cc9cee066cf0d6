// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sensvq {

enum class ErrorCode {
  kDimensionMismatch,
  kNonFinite,
  kNonSymmetric,
  kSingularAfterDamping,
  kTooLarge,
  kInvalidPermutation,
  kInvalidK,
  kEmptyBatch,
  kLengthMismatch,
  kCutOutOfRange,
  kAllZeroSensitivity,
  kInvalidArgument,
  kInvalidConfig,
  kIoError,
  kBadMagic,
  kUnsupportedDtype,
  kNonCOrder,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNonSymmetric: return "NonSymmetric";
    case ErrorCode::kSingularAfterDamping: return "SingularAfterDamping";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kInvalidPermutation: return "InvalidPermutation";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kCutOutOfRange: return "CutOutOfRange";
    case ErrorCode::kAllZeroSensitivity: return "AllZeroSensitivity";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kNonCOrder: return "NonCOrder";
  }
  return "Unknown";
}

}  // namespace sensvq
