#include "scalinglab/error.hpp"

namespace scalinglab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::InvalidPrefix: return "InvalidPrefix";
    case ErrorCode::IncompleteSolution: return "IncompleteSolution";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoCompleteSolutions: return "NoCompleteSolutions";
    case ErrorCode::ParamMismatch: return "ParamMismatch";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NoFeasibleConfig: return "NoFeasibleConfig";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DegenerateAxis: return "DegenerateAxis";
  }
  return "Unknown";
}

}  // namespace scalinglab
