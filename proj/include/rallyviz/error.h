#pragma once

#include <stdexcept>
#include <string>

namespace rallyviz {

enum class ErrorCode {
  Validation,
  NotFound,
  Conflict,
  UnsupportedOrder,
  Io,
  Internal,
};

/// Every recoverable failure in the engine is an Error carrying a code, so
/// frontends (CLI exit codes, HTTP statuses) can map it without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(const std::string& message) {
  throw Error(ErrorCode::Validation, message);
}

}  // namespace rallyviz
