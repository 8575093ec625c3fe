#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairalloc {

enum class ErrorCode {
  DimensionMismatch,
  NegativeValue,
  NonFiniteValue,
  AllZeroRound,
  AgentAllZero,
  InvalidWeight,
  DeclaredEpsilonViolated,
  IndexOutOfRange,
  AllZeroValues,
  NonpositiveDelta,
  InvalidProjection,
  InvalidEpsilon,
  InvalidBase,
  InvalidParameters,
  InvalidPhases,
  InfeasibleDensity,
  NoConvergence,
  DegenerateAgent,
  InstanceTooLarge,
  ZeroUtility,
  UnknownGenerator,
  ParseError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace fairalloc
