#include "markov_ruin/errors.hpp"

namespace markov_ruin {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::MissingRequired: return "MissingRequired";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonStationary: return "NonStationary";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ResidualUnavailable: return "ResidualUnavailable";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::MinorizationViolated: return "MinorizationViolated";
    case ErrorCode::CycleOverflow: return "CycleOverflow";
    case ErrorCode::PowerIterationStall: return "PowerIterationStall";
    case ErrorCode::NoPositiveRoot: return "NoPositiveRoot";
    case ErrorCode::NoUpperBracket: return "NoUpperBracket";
    case ErrorCode::EffectiveSampleCollapse: return "EffectiveSampleCollapse";
    case ErrorCode::TruncationDominance: return "TruncationDominance";
    case ErrorCode::NonContracting: return "NonContracting";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::TooFewEvents: return "TooFewEvents";
    case ErrorCode::DegenerateMcheck: return "DegenerateMcheck";
    case ErrorCode::HorizonSuspect: return "HorizonSuspect";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::UnknownKey:
    case ErrorCode::MissingRequired:
      return 2;
    case ErrorCode::UnknownKind:
    case ErrorCode::InvalidParameter:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonStationary:
    case ErrorCode::Unsupported:
    case ErrorCode::ResidualUnavailable:
      return 3;
    case ErrorCode::Internal:
      return 5;
    default:
      return 4;
  }
}

Error::Error(ErrorCode code, std::string field, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) +
                         (field.empty() ? "" : "(" + field + ")") + ": " + message),
      code_(code),
      field_(std::move(field)) {}

Error::Error(ErrorCode code, const std::string& message) : Error(code, "", message) {}

}  // namespace markov_ruin
