#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anreach {

enum class ErrorCode {
  UnassignedSymbol,
  NonPositiveDenominator,
  NotDivisible,
  UnknownSymbol,
  MixedDenominators,
  InvalidModel,
  ParseError,
  InvalidArgument,
  NonFiniteDerivative,
  PositivityFloorBreached,
  SignChangingCoefficient,
  NonAffineDenominatorUncertainty,
  BoundExceedsDenominator,
  UncertaintyOutOfBounds,
  EnvelopeNonnegativityViolated,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; all library failures use it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace anreach
