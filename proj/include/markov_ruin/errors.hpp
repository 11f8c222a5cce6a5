#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace markov_ruin {

enum class ErrorCode {
  // configuration
  ParseError,
  UnknownKey,
  MissingRequired,
  // model validation
  UnknownKind,
  InvalidParameter,
  DimensionMismatch,
  NonStationary,
  Unsupported,
  ResidualUnavailable,
  // statistical / numerical diagnostics
  QuadratureFailure,
  MinorizationViolated,
  CycleOverflow,
  PowerIterationStall,
  NoPositiveRoot,
  NoUpperBracket,
  EffectiveSampleCollapse,
  TruncationDominance,
  NonContracting,
  InsufficientTail,
  TooFewEvents,
  DegenerateMcheck,
  HorizonSuspect,
  // anything else
  Internal,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for an error: 2 config, 3 model validation,
/// 4 statistical diagnostic, 5 internal.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string field, const std::string& message);
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Offending field or parameter name; empty when not applicable.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace markov_ruin
