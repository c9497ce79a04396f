#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hvpr {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kOutOfRange,
  kEmptyInput,
  kIo,
  kBadMagic,
  kTruncated,
  kVersionMismatch,
  kMalformed,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; `code()` separates failure classes
// so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hvpr
