#include "anreach/error.hpp"

namespace anreach {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnassignedSymbol: return "UnassignedSymbol";
    case ErrorCode::NonPositiveDenominator: return "NonPositiveDenominator";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::MixedDenominators: return "MixedDenominators";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteDerivative: return "NonFiniteDerivative";
    case ErrorCode::PositivityFloorBreached: return "PositivityFloorBreached";
    case ErrorCode::SignChangingCoefficient: return "SignChangingCoefficient";
    case ErrorCode::NonAffineDenominatorUncertainty: return "NonAffineDenominatorUncertainty";
    case ErrorCode::BoundExceedsDenominator: return "BoundExceedsDenominator";
    case ErrorCode::UncertaintyOutOfBounds: return "UncertaintyOutOfBounds";
    case ErrorCode::EnvelopeNonnegativityViolated: return "EnvelopeNonnegativityViolated";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace anreach
