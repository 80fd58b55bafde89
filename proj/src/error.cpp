#include "error.hpp"

#include <sstream>

namespace knotmorse {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "syntax";
    case ErrorCode::UnknownIdentifier: return "unknown_identifier";
    case ErrorCode::OpenCurve: return "open_curve";
    case ErrorCode::SingularCurve: return "singular_curve";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::TooCloseToKnot: return "too_close_to_knot";
    case ErrorCode::DegenerateCriticalPoint: return "degenerate_critical_point";
    case ErrorCode::NoCriticalPoints: return "no_critical_points";
    case ErrorCode::BoundaryClipping: return "boundary_clipping";
    case ErrorCode::NonManifold: return "non_manifold";
    case ErrorCode::Topology: return "topology";
    case ErrorCode::ClustersTooClose: return "clusters_too_close";
    case ErrorCode::UnstableGenus: return "unstable_genus";
    case ErrorCode::LevelNotRegular: return "level_not_regular";
    case ErrorCode::Io: return "io";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

namespace {
std::string too_close_message(double distance, double min_distance) {
  std::ostringstream os;
  os.precision(6);
  os << "point is too close to the knot: estimated distance " << distance
     << " < exclusion radius " << min_distance;
  return os.str();
}
}  // namespace

TooCloseError::TooCloseError(double distance, double min_distance)
    : Error(ErrorCode::TooCloseToKnot, too_close_message(distance, min_distance)),
      distance_(distance) {}

}  // namespace knotmorse
