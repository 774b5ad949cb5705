#pragma once

#include <stdexcept>
#include <string>

namespace qslam {

// Base class for all recoverable errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The two largest eigenvalues of the quadric envelope coincide, so the
// major axis is not defined (e.g. spheres).
struct DegenerateShape : Error {
  using Error::Error;
};

// Quadric centroid is at or behind the camera plane.
struct BehindCamera : Error {
  using Error::Error;
};

// Projected dual conic does not bound a real ellipse.
struct DegenerateConic : Error {
  using Error::Error;
};

// Landmark seen from fewer than the minimum number of distinct poses.
struct InsufficientViews : Error {
  using Error::Error;
};

// Dataset references undeclared poses/tracks or is otherwise malformed.
struct InconsistentDataset : Error {
  using Error::Error;
};

// Normal equations rank-deficient beyond what damping can repair.
struct SingularSystem : Error {
  using Error::Error;
};

struct EmptyTrack : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct UnmatchedLandmark : Error {
  using Error::Error;
};

// Rejection sampling could not place all scene objects.
struct PlacementFailure : Error {
  using Error::Error;
};

}  // namespace qslam
