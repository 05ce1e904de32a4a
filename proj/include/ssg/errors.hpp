#pragma once

#include <stdexcept>
#include <string>

namespace ssg {

/** Failure categories, aligned with the CLI exit-code contract. */
enum class ErrorKind {
  InvalidInput,   ///< malformed file, bad letters, violated precondition (exit 2)
  BoundExceeded,  ///< a configured bound was hit before a decision was reached (exit 3)
  Internal,       ///< broken internal invariant; always a bug
};

/** Exception carrying an ErrorKind so the CLI can map it to an exit code. */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& message) {
  throw Error(ErrorKind::InvalidInput, message);
}

[[noreturn]] inline void fail_bound(const std::string& message) {
  throw Error(ErrorKind::BoundExceeded, message);
}

[[noreturn]] inline void fail_internal(const std::string& message) {
  throw Error(ErrorKind::Internal, message);
}

}  // namespace ssg
