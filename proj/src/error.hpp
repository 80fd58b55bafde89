#pragma once

#include <stdexcept>
#include <string>

namespace knotmorse {

enum class ErrorCode {
  Syntax = 1,
  UnknownIdentifier,
  OpenCurve,
  SingularCurve,
  InvalidArgument,
  TooCloseToKnot,
  DegenerateCriticalPoint,
  NoCriticalPoints,
  BoundaryClipping,
  NonManifold,
  Topology,
  ClustersTooClose,
  UnstableGenus,
  LevelNotRegular,
  Io,
  Config,
};

const char* error_code_name(ErrorCode code);

// Single exception type for the library; the code classifies the failure so
// the C layer can map it onto a status value without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by field evaluation when the query point is inside the exclusion
// radius around the knot.
class TooCloseError : public Error {
 public:
  TooCloseError(double distance, double min_distance);

  double distance() const noexcept { return distance_; }

 private:
  double distance_;
};

}  // namespace knotmorse
