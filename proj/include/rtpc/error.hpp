#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtpc {

// Every failure the library reports. The numeric value doubles as the CLI
// exit code; 0-2 are reserved for success, internal errors and usage errors.
enum class ErrorCode : int {
  // I/O and file formats
  IoFailure = 10,
  BadMagic = 11,
  TruncatedFile = 12,
  InvalidHeader = 13,
  NonFiniteVelocity = 14,
  ParseError = 15,
  NonUniformSampling = 16,
  NonMonotoneTime = 17,
  TooShort = 18,
  NotPgm = 19,
  DimensionMismatch = 20,
  // flow extraction
  SeedOutsideVessel = 30,
  EmptySegmentation = 31,
  InsufficientStationaryTissue = 32,
  GridMismatch = 33,
  // cardiac cycles
  NoCyclesFound = 40,
  DegenerateCycle = 41,
  // respiration
  NoBreathsDetected = 50,
  NonAlternating = 51,
  // diff analysis
  InsufficientCycles = 60,
  ZeroInspiratoryValue = 61,
  // statistics
  TooFewSamples = 70,
  ZeroVariance = 71,
  AllZeroDifferences = 72,
  Empty = 73,
  // simulation
  InvalidConfig = 80,
  // generic precondition violation
  InvalidArgument = 90,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline int exit_code(ErrorCode code) { return static_cast<int>(code); }

}  // namespace rtpc
