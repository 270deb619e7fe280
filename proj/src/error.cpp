#include "nsopt/error.hpp"

namespace nsopt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveStep: return "NonPositiveStep";
    case ErrorCode::InvertedBounds: return "InvertedBounds";
    case ErrorCode::UnboundedLipschitz: return "UnboundedLipschitz";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::NotCertified: return "NotCertified";
    case ErrorCode::AuditFailure: return "AuditFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace nsopt
