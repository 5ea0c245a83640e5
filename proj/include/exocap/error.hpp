#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exocap {

/// Error categories surfaced by the library. The CLI prints the category name
/// verbatim so scripts can match on it.
enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  TooFewPairs,
  DegenerateInput,
  DuplicateId,
  SessionAlreadyStarted,
  ParseError,
  LimitOrderError,
  DuplicateJoint,
  DegenerateRange,
  SourceIndexOutOfRange,
  IoError,
  InvalidRoster,
  TickOrderError,
  SizeMismatch,
  WriterClosed,
  ChecksumMismatch,
  FormatVersionUnsupported,
  FormatError,
  NoSuchTask,
  GapInActions,
  SeamViolation,
};

std::string_view to_string(ErrorCode code) noexcept;

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

}  // namespace exocap
