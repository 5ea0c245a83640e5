#include "exocap/error.hpp"

namespace exocap {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::SessionAlreadyStarted: return "SessionAlreadyStarted";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::LimitOrderError: return "LimitOrderError";
    case ErrorCode::DuplicateJoint: return "DuplicateJoint";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::SourceIndexOutOfRange: return "SourceIndexOutOfRange";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidRoster: return "InvalidRoster";
    case ErrorCode::TickOrderError: return "TickOrderError";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::WriterClosed: return "WriterClosed";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::FormatVersionUnsupported: return "FormatVersionUnsupported";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::NoSuchTask: return "NoSuchTask";
    case ErrorCode::GapInActions: return "GapInActions";
    case ErrorCode::SeamViolation: return "SeamViolation";
  }
  return "Unknown";
}

}  // namespace exocap
