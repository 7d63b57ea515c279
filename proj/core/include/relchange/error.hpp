#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relchange {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateWindow,
  kAllCandidatesDegenerate,
  kInvalidWindow,
  kZeroBaseline,
  kInvalidTuning,
  kGridTooSmall,
  kZeroDerivative,
  kParseError,
  kEmptyInput,
  kConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-checkable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace relchange
