#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "qslam/common.hpp"

namespace qslam {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Vector9d = Eigen::Matrix<double, 9, 1>;

// ---------------------------------------------------------------------------
// SO(3) helpers
// ---------------------------------------------------------------------------

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

// Rodrigues formula; stable for small angles.
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w);

// Inverse of exp_so3; handles angles near 0 and pi.
Eigen::Vector3d log_so3(const Eigen::Matrix3d& R);

// R = Rz(theta3) * Ry(theta2) * Rx(theta1).
Eigen::Matrix3d rotation_from_euler_zyx(const Eigen::Vector3d& theta);

// Angles (theta1, theta2, theta3) such that rotation_from_euler_zyx
// reproduces R. Not unique; the returned branch has theta2 in [-pi/2, pi/2].
Eigen::Vector3d euler_zyx_from_rotation(const Eigen::Matrix3d& R);

// ---------------------------------------------------------------------------
// Pose
// ---------------------------------------------------------------------------

// Rigid transform in SE(3). Composition convention: world_point = R * p + t.
class Pose {
 public:
  Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose identity() { return Pose(); }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Pose inverse() const;
  Pose operator*(const Pose& other) const;

  // Right perturbation on the local tangent space: this * exp_se3(delta).
  Pose retract(const Vector6d& delta) const;

  Eigen::Matrix4d matrix() const;
  bool is_valid(double tol = 1e-9) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

Pose compose(const Pose& a, const Pose& b);

// Motion model: apply a body-frame relative increment u to pose x.
Pose apply_motion(const Pose& x, const Pose& u);

// Tangent coordinates ordered (rotation 0..2, translation 3..5).
Pose exp_se3(const Vector6d& xi);
Vector6d log_se3(const Pose& p);

// ---------------------------------------------------------------------------
// Camera and boxes
// ---------------------------------------------------------------------------

struct CameraIntrinsics {
  double fx = 320.0;
  double fy = 320.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  bool is_valid() const {
    return fx > 0 && fy > 0 && cx > 0 && cx < width && cy > 0 && cy < height;
  }
  Eigen::Matrix3d matrix() const;
};

struct BoundingBox2D {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;

  BoundingBox2D() = default;
  BoundingBox2D(double xmin, double ymin, double xmax, double ymax);

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Eigen::Vector2d center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
  Eigen::Vector4d vector() const { return {xmin, ymin, xmax, ymax}; }

  bool intersects(const BoundingBox2D& other) const;
  BoundingBox2D clipped(double w, double h) const;
};

// Axis-aligned box in world coordinates.
struct Box3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();

  Box3D() = default;
  Box3D(const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents);

  double volume() const { return 8.0 * half_extents.prod(); }
  bool intersects(const Box3D& other) const;
};

// Homogeneous image-plane dual conic, C* = P Q* P^T.
struct DualConic {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Zero();
};

// ---------------------------------------------------------------------------
// ConstrainedDualQuadric
// ---------------------------------------------------------------------------

// Ellipsoid landmark. Externally a 9-vector (3 rotation angles, centroid,
// semi-axis lengths); internally the rotation is kept as a matrix so solver
// updates can perturb it on the rotation group instead of through Euler
// angles, and the radii stay positive because updates scale them by
// exp(delta).
class ConstrainedDualQuadric {
 public:
  ConstrainedDualQuadric();  // unit sphere at the origin
  ConstrainedDualQuadric(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& centroid,
                         const Eigen::Vector3d& radii);

  static ConstrainedDualQuadric from_vector(const Vector9d& q);
  Vector9d to_vector() const;

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& centroid() const { return centroid_; }
  const Eigen::Vector3d& radii() const { return radii_; }

  // Tangent layout: (rotation 0..2, centroid 3..5, log-radii 6..8).
  ConstrainedDualQuadric retract(const Vector9d& delta) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d centroid_;
  Eigen::Vector3d radii_;
};

// Full 4x4 dual quadric, block form [[E - t t^T, -t], [-t^T, -1]] with
// E = R diag(s^2) R^T.
Eigen::Matrix4d quadric_matrix(const ConstrainedDualQuadric& q);

// Origin-centered 3x3 envelope E = R diag(s^2) R^T (translation dropped).
Eigen::Matrix3d envelope_at_origin(const ConstrainedDualQuadric& q);

// Unit eigenvector of the envelope with the largest eigenvalue. Sign is
// canonicalized so the component of largest magnitude is positive. Throws
// DegenerateShape when the top two eigenvalues are within gap_tol
// (relative), since the axis is then ill-defined.
Eigen::Vector3d major_axis(const ConstrainedDualQuadric& q, double gap_tol = 1e-6);

// |m . z| for the major axis m and global z = (0,0,1); in [0, 1].
double cosine_similarity_z(const ConstrainedDualQuadric& q, double gap_tol = 1e-6);

inline constexpr double kProjectionDepthEpsilon = 1e-3;  // meters

// Image of the quadric under the camera at pose x (camera-to-world):
// C* = P Q* P^T with P = K [R|t] of the world-to-camera transform.
// Throws BehindCamera if the centroid depth <= kProjectionDepthEpsilon.
DualConic project_quadric(const Pose& x, const CameraIntrinsics& K,
                          const ConstrainedDualQuadric& q);

// Axis-aligned box tangent to the conic, not clipped to the image.
// Throws DegenerateConic when the conic does not bound a real ellipse.
BoundingBox2D conic_bbox(const DualConic& c, const CameraIntrinsics& K);

// Tight axis-aligned bounding box of the ellipsoid in world coordinates:
// half extent along axis k is sqrt(E_kk) of the origin-centered envelope.
Box3D quadric_aabb(const ConstrainedDualQuadric& q);

}  // namespace qslam
