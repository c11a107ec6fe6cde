#include "qtraj/error.hpp"

namespace qtraj {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonHermitianH: return "NonHermitianH";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadChannelIndex: return "BadChannelIndex";
    case ErrorCode::DimensionNotTwo: return "DimensionNotTwo";
    case ErrorCode::NoDiffusiveChannels: return "NoDiffusiveChannels";
    case ErrorCode::MultipleDiffusiveOps: return "MultipleDiffusiveOps";
    case ErrorCode::NotPurePreserving: return "NotPurePreserving";
    case ErrorCode::JumpChannelsPresent: return "JumpChannelsPresent";
    case ErrorCode::ZeroLinewidth: return "ZeroLinewidth";
    case ErrorCode::ZeroRabi: return "ZeroRabi";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ZeroTrace: return "ZeroTrace";
    case ErrorCode::WeightUnderflow: return "WeightUnderflow";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NonUniqueEquilibrium: return "NonUniqueEquilibrium";
    case ErrorCode::NoStationaryState: return "NoStationaryState";
    case ErrorCode::TraceDrift: return "TraceDrift";
    case ErrorCode::EnsembleFailure: return "EnsembleFailure";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroTrace:
    case ErrorCode::WeightUnderflow:
    case ErrorCode::StepTooLarge:
    case ErrorCode::NonUniqueEquilibrium:
    case ErrorCode::NoStationaryState:
    case ErrorCode::TraceDrift:
    case ErrorCode::EnsembleFailure:
      return true;
    default:
      return false;
  }
}

}  // namespace qtraj
