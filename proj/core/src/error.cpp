#include "relchange/error.hpp"

namespace relchange {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateWindow: return "DegenerateWindow";
    case ErrorCode::kAllCandidatesDegenerate: return "AllCandidatesDegenerate";
    case ErrorCode::kInvalidWindow: return "InvalidWindow";
    case ErrorCode::kZeroBaseline: return "ZeroBaseline";
    case ErrorCode::kInvalidTuning: return "InvalidTuning";
    case ErrorCode::kGridTooSmall: return "GridTooSmall";
    case ErrorCode::kZeroDerivative: return "ZeroDerivative";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace relchange
