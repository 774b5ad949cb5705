#include "qslam/factors.hpp"

namespace qslam {

NoiseModel::NoiseModel(const Eigen::VectorXd& sigmas) : sigmas_(sigmas) {
  if (sigmas_.size() == 0 || (sigmas_.array() <= 0).any()) {
    throw Error("NoiseModel: standard deviations must be positive");
  }
}

NoiseModel NoiseModel::isotropic(int dim, double sigma) {
  return NoiseModel(Eigen::VectorXd::Constant(dim, sigma));
}

Eigen::VectorXd NoiseModel::whiten(const Eigen::VectorXd& r) const {
  return r.cwiseQuotient(sigmas_);
}

Eigen::MatrixXd NoiseModel::whiten_jacobian(const Eigen::MatrixXd& J) const {
  return sigmas_.cwiseInverse().asDiagonal() * J;
}

double NoiseModel::squared_mahalanobis(const Eigen::VectorXd& r) const {
  return whiten(r).squaredNorm();
}

double OrientationTarget::goal() const {
  switch (kind) {
    case OrientationKind::kHorizontal:
      return 0.0;
    case OrientationKind::kVertical:
      return 1.0;
    default:
      throw Error("OrientationTarget: unassigned target has no goal value");
  }
}

Vector6d odometry_residual(const Pose& x_i, const Pose& x_next, const Pose& u_i) {
  return log_se3(x_next.inverse() * apply_motion(x_i, u_i));
}

Eigen::Vector4d bbox_residual(const Pose& x, const ConstrainedDualQuadric& q,
                              const BoundingBox2D& measured, const CameraIntrinsics& K) {
  const BoundingBox2D predicted = conic_bbox(project_quadric(x, K, q), K);
  return measured.vector() - predicted.vector();
}

double orientation_residual(const ConstrainedDualQuadric& q, const OrientationTarget& target) {
  return target.goal() - cosine_similarity_z(q);
}

}  // namespace qslam
