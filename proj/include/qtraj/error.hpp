#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qtraj {

enum class ErrorCode {
  // validation
  DimensionMismatch,
  NotHermitian,
  NonHermitianH,
  InvalidState,
  InvalidArgument,
  BadChannelIndex,
  DimensionNotTwo,
  NoDiffusiveChannels,
  MultipleDiffusiveOps,
  NotPurePreserving,
  JumpChannelsPresent,
  ZeroLinewidth,
  ZeroRabi,
  EmptyWindow,
  ConfigError,
  // numerical
  ZeroTrace,
  WeightUnderflow,
  StepTooLarge,
  NonUniqueEquilibrium,
  NoStationaryState,
  TraceDrift,
  EnsembleFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of the numerics (as opposed to bad input).
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qtraj
