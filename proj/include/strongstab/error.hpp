#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strongstab {

/// Failure categories raised by the library. Feasibility outcomes of the
/// LMI and γ-search layers are returned as values and never appear here
/// unless a caller explicitly asks for a hard failure.
enum class ErrorCode {
  NonConvergence,
  NotSquare,
  DimensionMismatch,
  SingularPencil,
  DegeneratePencil,
  ImproperTransfer,
  AlgebraicLoop,
  NonStrictlyProperController,
  UnstableSystem,
  NotStabilizable,
  ImaginaryAxisEigenvalue,
  IllConditionedBasis,
  NormalizationFailure,
  BadShape,
  SolverStall,
  BracketInfeasible,
  NonMonotoneDetected,
  Infeasible,
  RiccatiFailure,
  NormComputationFailure,
  GammaInfeasible,
  AssumptionViolated,
  InnerLmiInfeasible,
  CrossCheckMismatch,
  MissingWeights,
  ParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace strongstab
