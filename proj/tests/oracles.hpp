// Test-only oracles, independent of the library's projection path: boxes are
// obtained by projecting dense samples of the ellipsoid surface through the
// raw pinhole equations.
#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "qslam/geometry.hpp"

namespace qslam::test {

// Tangent box of an ellipsoid (center, R, radii) seen from `camera`, from n
// Fibonacci-sphere surface samples. Caller guarantees positive depth.
inline BoundingBox2D sampled_projection_bbox(const Pose& camera, const CameraIntrinsics& K,
                                             const Eigen::Matrix3d& R,
                                             const Eigen::Vector3d& center,
                                             const Eigen::Vector3d& radii, int n = 200000) {
  const Eigen::Matrix3d R_wc = camera.rotation().transpose();
  const Eigen::Vector3d t_wc = -(R_wc * camera.translation());
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Eigen::Vector3d unit(rho * std::cos(phi), rho * std::sin(phi), z);
    const Eigen::Vector3d world = center + R * radii.cwiseProduct(unit);
    const Eigen::Vector3d cam = R_wc * world + t_wc;
    const double u = K.fx * cam.x() / cam.z() + K.cx;
    const double v = K.fy * cam.y() / cam.z() + K.cy;
    xmin = std::min(xmin, u);
    xmax = std::max(xmax, u);
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  return BoundingBox2D(xmin, ymin, xmax, ymax);
}

inline BoundingBox2D sampled_projection_bbox(const Pose& camera, const CameraIntrinsics& K,
                                             const ConstrainedDualQuadric& q, int n = 200000) {
  return sampled_projection_bbox(camera, K, q.rotation(), q.centroid(), q.radii(), n);
}

// Largest |coordinate| of the sampled surface along each world axis,
// relative to the centroid: a brute-force axis-aligned envelope.
inline Eigen::Vector3d sampled_aabb_half_extents(const ConstrainedDualQuadric& q,
                                                 int n = 200000) {
  Eigen::Vector3d extent = Eigen::Vector3d::Zero();
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Eigen::Vector3d unit(rho * std::cos(phi), rho * std::sin(phi), z);
    extent = extent.cwiseMax(
        (q.rotation() * q.radii().cwiseProduct(unit)).cwiseAbs());
  }
  return extent;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Random quadric with clearly distinct radii (well-defined major axis).
inline ConstrainedDualQuadric random_quadric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double major = 0.3 + 0.4 * u(rng);
  const Eigen::Vector3d radii(major, major * (0.4 + 0.2 * u(rng)),
                              major * (0.7 + 0.15 * u(rng)));
  const Eigen::Vector3d center(4.0 * (u(rng) - 0.5), 4.0 * (u(rng) - 0.5), 2.0 * u(rng));
  return ConstrainedDualQuadric(random_rotation(rng), center, radii);
}

inline Pose random_pose(std::mt19937_64& rng, double translation_scale = 2.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Pose(random_rotation(rng),
              translation_scale * Eigen::Vector3d(u(rng), u(rng), u(rng)));
}

}  // namespace qslam::test
