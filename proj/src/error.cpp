#include "dimminer/error.hpp"

namespace dimminer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kUndefined: return "undefined";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace dimminer
