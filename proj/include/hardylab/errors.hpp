#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hardylab {

enum class ErrorCode {
  InvalidArgument,
  InvalidDomain,
  PointOutsideDomain,
  TooCloseToBoundary,
  EmptyRegion,
  InvalidGrading,
  MeshGenerationFailure,
  StripTooThin,
  NotATorus,
  ParseError,
  NonpositiveDiffusion,
  NonpositiveWeight,
  SingularQuadrature,
  DegenerateBand,
  FactorizationFailure,
  NoConvergence,
  ExponentOutOfRange,
  MethodNotApplicable,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised by the coefficient-expression parser.
class ParseError : public Error {
public:
  ParseError(std::size_t offset, std::vector<std::string> expected,
             const std::string& message)
      : Error(ErrorCode::ParseError, message), offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

} // namespace hardylab
