#include "hardylab/errors.hpp"

namespace hardylab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::InvalidDomain: return "InvalidDomain";
  case ErrorCode::PointOutsideDomain: return "PointOutsideDomain";
  case ErrorCode::TooCloseToBoundary: return "TooCloseToBoundary";
  case ErrorCode::EmptyRegion: return "EmptyRegion";
  case ErrorCode::InvalidGrading: return "InvalidGrading";
  case ErrorCode::MeshGenerationFailure: return "MeshGenerationFailure";
  case ErrorCode::StripTooThin: return "StripTooThin";
  case ErrorCode::NotATorus: return "NotATorus";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::NonpositiveDiffusion: return "NonpositiveDiffusion";
  case ErrorCode::NonpositiveWeight: return "NonpositiveWeight";
  case ErrorCode::SingularQuadrature: return "SingularQuadrature";
  case ErrorCode::DegenerateBand: return "DegenerateBand";
  case ErrorCode::FactorizationFailure: return "FactorizationFailure";
  case ErrorCode::NoConvergence: return "NoConvergence";
  case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
  case ErrorCode::MethodNotApplicable: return "MethodNotApplicable";
  case ErrorCode::ConfigError: return "ConfigError";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

} // namespace hardylab
