#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dimminer {

enum class ErrorCode {
  kConfig,
  kDegenerate,
  kParse,
  kConflict,
  kNumeric,
  kInvalidArgument,
  kUndefined,
  kNotFound,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; code() is stable and
// machine-parsable, what() carries the human detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dimminer
