#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluidnet {

enum class ErrorCode {
  SpectralRadiusTooLarge,
  ConstituencyNotPartition,
  NegativeRate,
  BadPermutation,
  InvalidRouting,
  DimensionMismatch,
  InvalidStation,
  InfeasibleActiveSet,
  StepTooLarge,
  NonpositiveScale,
  ShiftBeyondHorizon,
  EndpointMismatch,
  UnknownFixture,
  InvalidCertificate,
  InvalidArgument,
  NotCompletelyS,
  DimensionTooLarge,
  PushBoundExceeded,
  EventBudgetExceeded,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Error raised by every fluidnet operation. The code identifies the contract
/// violation; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SpectralRadiusTooLarge: return "SpectralRadiusTooLarge";
    case ErrorCode::ConstituencyNotPartition: return "ConstituencyNotPartition";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::BadPermutation: return "BadPermutation";
    case ErrorCode::InvalidRouting: return "InvalidRouting";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidStation: return "InvalidStation";
    case ErrorCode::InfeasibleActiveSet: return "InfeasibleActiveSet";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonpositiveScale: return "NonpositiveScale";
    case ErrorCode::ShiftBeyondHorizon: return "ShiftBeyondHorizon";
    case ErrorCode::EndpointMismatch: return "EndpointMismatch";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::InvalidCertificate: return "InvalidCertificate";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotCompletelyS: return "NotCompletelyS";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::PushBoundExceeded: return "PushBoundExceeded";
    case ErrorCode::EventBudgetExceeded: return "EventBudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fluidnet
