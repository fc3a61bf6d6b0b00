#include "rtpc/error.hpp"

namespace rtpc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::InvalidHeader: return "InvalidHeader";
    case ErrorCode::NonFiniteVelocity: return "NonFiniteVelocity";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonUniformSampling: return "NonUniformSampling";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NotPgm: return "NotPgm";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SeedOutsideVessel: return "SeedOutsideVessel";
    case ErrorCode::EmptySegmentation: return "EmptySegmentation";
    case ErrorCode::InsufficientStationaryTissue: return "InsufficientStationaryTissue";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NoCyclesFound: return "NoCyclesFound";
    case ErrorCode::DegenerateCycle: return "DegenerateCycle";
    case ErrorCode::NoBreathsDetected: return "NoBreathsDetected";
    case ErrorCode::NonAlternating: return "NonAlternating";
    case ErrorCode::InsufficientCycles: return "InsufficientCycles";
    case ErrorCode::ZeroInspiratoryValue: return "ZeroInspiratoryValue";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rtpc
