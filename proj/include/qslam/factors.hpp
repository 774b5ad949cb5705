#pragma once

#include <Eigen/Core>

#include "qslam/geometry.hpp"

namespace qslam {

// Diagonal Gaussian noise model; whitening divides by the per-dimension
// standard deviations so that ||whiten(r)||^2 equals the Mahalanobis form.
class NoiseModel {
 public:
  explicit NoiseModel(const Eigen::VectorXd& sigmas);

  static NoiseModel isotropic(int dim, double sigma);
  static NoiseModel diagonal(const Eigen::VectorXd& sigmas) { return NoiseModel(sigmas); }

  int dim() const { return static_cast<int>(sigmas_.size()); }
  const Eigen::VectorXd& sigmas() const { return sigmas_; }

  Eigen::VectorXd whiten(const Eigen::VectorXd& r) const;
  Eigen::MatrixXd whiten_jacobian(const Eigen::MatrixXd& J) const;  // row-wise
  double squared_mahalanobis(const Eigen::VectorXd& r) const;

 private:
  Eigen::VectorXd sigmas_;
};

enum class OrientationKind { kHorizontal, kVertical, kUnassigned };

// Semantic orientation prior on a quadric's major axis. Vertical classes
// pull the bounded cosine similarity toward 1, horizontal toward 0.
struct OrientationTarget {
  OrientationKind kind = OrientationKind::kUnassigned;

  bool assigned() const { return kind != OrientationKind::kUnassigned; }

  // Target value g for the cosine similarity; only defined when assigned.
  double goal() const;

  static OrientationTarget horizontal() { return {OrientationKind::kHorizontal}; }
  static OrientationTarget vertical() { return {OrientationKind::kVertical}; }
  static OrientationTarget unassigned() { return {OrientationKind::kUnassigned}; }
};

// log(x_next^-1 * (x_i * u_i)) in tangent coordinates (rotation, translation);
// zero exactly when the prediction matches.
Vector6d odometry_residual(const Pose& x_i, const Pose& x_next, const Pose& u_i);

// Measured box minus projected tangent box, pixels, (xmin, ymin, xmax, ymax).
// Propagates BehindCamera / DegenerateConic.
Eigen::Vector4d bbox_residual(const Pose& x, const ConstrainedDualQuadric& q,
                              const BoundingBox2D& measured, const CameraIntrinsics& K);

// Scalar g - c for assigned targets; propagates DegenerateShape for shapes
// with no preferred axis.
double orientation_residual(const ConstrainedDualQuadric& q, const OrientationTarget& target);

inline constexpr double kDefaultJacobianStep = 1e-6;

// Central-difference Jacobian of a residual over one variable's tangent
// space. residual_of_delta maps a tangent perturbation (applied through the
// variable's retraction) to the residual vector.
template <typename Fn>
Eigen::MatrixXd numeric_jacobian(Fn&& residual_of_delta, int tangent_dim,
                                 double step = kDefaultJacobianStep) {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(tangent_dim);
  Eigen::MatrixXd J;
  for (int k = 0; k < tangent_dim; ++k) {
    delta[k] = step;
    const Eigen::VectorXd forward = residual_of_delta(delta);
    delta[k] = -step;
    const Eigen::VectorXd backward = residual_of_delta(delta);
    delta[k] = 0.0;
    if (J.size() == 0) J.resize(forward.size(), tangent_dim);
    J.col(k) = (forward - backward) / (2.0 * step);
  }
  return J;
}

}  // namespace qslam
