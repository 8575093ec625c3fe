#include "fairalloc/error.hpp"

namespace fairalloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::AllZeroRound: return "AllZeroRound";
    case ErrorCode::AgentAllZero: return "AgentAllZero";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::DeclaredEpsilonViolated: return "DeclaredEpsilonViolated";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::AllZeroValues: return "AllZeroValues";
    case ErrorCode::NonpositiveDelta: return "NonpositiveDelta";
    case ErrorCode::InvalidProjection: return "InvalidProjection";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::InvalidBase: return "InvalidBase";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::InvalidPhases: return "InvalidPhases";
    case ErrorCode::InfeasibleDensity: return "InfeasibleDensity";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateAgent: return "DegenerateAgent";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::ZeroUtility: return "ZeroUtility";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace fairalloc
