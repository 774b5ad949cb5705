#include "qslam/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qslam {

namespace {
constexpr double kSmallAngle = 1e-10;
}

/* ************************************************************************* */
Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d W;
  W << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return W;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const Eigen::Matrix3d W = skew(w);
  if (theta2 < kSmallAngle * kSmallAngle) {
    return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
  }
  const double theta = std::sqrt(theta2);
  return Eigen::Matrix3d::Identity() + (std::sin(theta) / theta) * W +
         ((1.0 - std::cos(theta)) / theta2) * W * W;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& R) {
  const double trace = R.trace();
  const double cos_theta = std::clamp(0.5 * (trace - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  const Eigen::Vector3d axis_unnormalized(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                                          R(1, 0) - R(0, 1));
  if (theta < 1e-9) {
    return 0.5 * axis_unnormalized;  // first-order term
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the off-diagonal differences vanish; recover the axis from
    // R = I + (1 - cos)(aa^T - I) + sin [a]x instead.
    const double one_minus_cos = 1.0 - cos_theta;
    int k;
    R.diagonal().maxCoeff(&k);
    Eigen::Vector3d axis;
    axis[k] = std::sqrt(std::max((R(k, k) - cos_theta) / one_minus_cos, 1e-12));
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    axis[i] = (R(i, k) + R(k, i)) / (2.0 * one_minus_cos * axis[k]);
    axis[j] = (R(j, k) + R(k, j)) / (2.0 * one_minus_cos * axis[k]);
    axis.normalize();
    // Resolve the sign from the (possibly tiny) skew part for continuity.
    if (axis.dot(axis_unnormalized) < 0) axis = -axis;
    return theta * axis;
  }
  return (theta / (2.0 * std::sin(theta))) * axis_unnormalized;
}

Eigen::Matrix3d rotation_from_euler_zyx(const Eigen::Vector3d& theta) {
  return (Eigen::AngleAxisd(theta.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(theta.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(theta.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d euler_zyx_from_rotation(const Eigen::Matrix3d& R) {
  const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  if (std::abs(std::cos(pitch)) < 1e-9) {
    // Gimbal lock: roll and yaw are coupled; put everything into yaw.
    return {0.0, pitch, std::atan2(-R(0, 1), R(1, 1))};
  }
  return {std::atan2(R(2, 1), R(2, 2)), pitch, std::atan2(R(1, 0), R(0, 0))};
}

/* ************************************************************************* */
Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {}

Pose Pose::inverse() const {
  return Pose(rotation_.transpose(), -(rotation_.transpose() * translation_));
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(rotation_ * other.rotation_, rotation_ * other.translation_ + translation_);
}

Pose Pose::retract(const Vector6d& delta) const { return *this * exp_se3(delta); }

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.topLeftCorner<3, 3>() = rotation_;
  T.topRightCorner<3, 1>() = translation_;
  return T;
}

bool Pose::is_valid(double tol) const {
  return (rotation_ * rotation_.transpose() - Eigen::Matrix3d::Identity()).norm() < tol &&
         std::abs(rotation_.determinant() - 1.0) < tol && translation_.allFinite();
}

Pose compose(const Pose& a, const Pose& b) { return a * b; }

Pose apply_motion(const Pose& x, const Pose& u) { return x * u; }

namespace {
// Left Jacobian of SO(3); maps translation tangent to group translation.
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const Eigen::Matrix3d W = skew(w);
  if (theta2 < kSmallAngle * kSmallAngle) {
    return Eigen::Matrix3d::Identity() + 0.5 * W + W * W / 6.0;
  }
  const double theta = std::sqrt(theta2);
  return Eigen::Matrix3d::Identity() + ((1.0 - std::cos(theta)) / theta2) * W +
         ((theta - std::sin(theta)) / (theta2 * theta)) * W * W;
}
}  // namespace

Pose exp_se3(const Vector6d& xi) {
  const Eigen::Vector3d w = xi.head<3>();
  const Eigen::Vector3d v = xi.tail<3>();
  return Pose(exp_so3(w), so3_left_jacobian(w) * v);
}

Vector6d log_se3(const Pose& p) {
  const Eigen::Vector3d w = log_so3(p.rotation());
  Vector6d xi;
  xi.head<3>() = w;
  // The left Jacobian is invertible for |w| < 2*pi, which log_so3 guarantees.
  xi.tail<3>() = so3_left_jacobian(w).lu().solve(p.translation());
  return xi;
}

/* ************************************************************************* */
Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d K;
  K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return K;
}

BoundingBox2D::BoundingBox2D(double xmin, double ymin, double xmax, double ymax)
    : xmin(xmin), ymin(ymin), xmax(xmax), ymax(ymax) {
  if (xmin > xmax || ymin > ymax) {
    throw Error("BoundingBox2D: min corner exceeds max corner");
  }
}

bool BoundingBox2D::intersects(const BoundingBox2D& other) const {
  return xmin <= other.xmax && other.xmin <= xmax && ymin <= other.ymax && other.ymin <= ymax;
}

BoundingBox2D BoundingBox2D::clipped(double w, double h) const {
  return BoundingBox2D(std::clamp(xmin, 0.0, w), std::clamp(ymin, 0.0, h),
                       std::clamp(xmax, 0.0, w), std::clamp(ymax, 0.0, h));
}

Box3D::Box3D(const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents)
    : center(center), half_extents(half_extents) {
  if ((half_extents.array() <= 0).any()) {
    throw Error("Box3D: half extents must be positive");
  }
}

bool Box3D::intersects(const Box3D& other) const {
  return ((center - other.center).cwiseAbs().array() <=
          (half_extents + other.half_extents).array())
      .all();
}

/* ************************************************************************* */
ConstrainedDualQuadric::ConstrainedDualQuadric()
    : rotation_(Eigen::Matrix3d::Identity()),
      centroid_(Eigen::Vector3d::Zero()),
      radii_(Eigen::Vector3d::Ones()) {}

ConstrainedDualQuadric::ConstrainedDualQuadric(const Eigen::Matrix3d& rotation,
                                               const Eigen::Vector3d& centroid,
                                               const Eigen::Vector3d& radii)
    : rotation_(rotation), centroid_(centroid), radii_(radii) {
  if ((radii_.array() <= 0).any()) {
    throw Error("ConstrainedDualQuadric: semi-axis lengths must be positive");
  }
}

ConstrainedDualQuadric ConstrainedDualQuadric::from_vector(const Vector9d& q) {
  return ConstrainedDualQuadric(rotation_from_euler_zyx(q.head<3>()), q.segment<3>(3),
                                q.tail<3>());
}

Vector9d ConstrainedDualQuadric::to_vector() const {
  Vector9d q;
  q.head<3>() = euler_zyx_from_rotation(rotation_);
  q.segment<3>(3) = centroid_;
  q.tail<3>() = radii_;
  return q;
}

ConstrainedDualQuadric ConstrainedDualQuadric::retract(const Vector9d& delta) const {
  return ConstrainedDualQuadric(rotation_ * exp_so3(delta.head<3>()),
                                centroid_ + delta.segment<3>(3),
                                radii_.cwiseProduct(delta.tail<3>().array().exp().matrix()));
}

/* ************************************************************************* */
Eigen::Matrix4d quadric_matrix(const ConstrainedDualQuadric& q) {
  const Eigen::Matrix3d E = envelope_at_origin(q);
  const Eigen::Vector3d& t = q.centroid();
  Eigen::Matrix4d Q;
  Q.topLeftCorner<3, 3>() = E - t * t.transpose();
  Q.topRightCorner<3, 1>() = -t;
  Q.bottomLeftCorner<1, 3>() = -t.transpose();
  Q(3, 3) = -1.0;
  return Q;
}

Eigen::Matrix3d envelope_at_origin(const ConstrainedDualQuadric& q) {
  const Eigen::Matrix3d E = q.rotation() *
                            q.radii().array().square().matrix().asDiagonal() *
                            q.rotation().transpose();
  return 0.5 * (E + E.transpose());
}

Eigen::Vector3d major_axis(const ConstrainedDualQuadric& q, double gap_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(envelope_at_origin(q));
  const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
  if ((lambda[2] - lambda[1]) / lambda[2] < gap_tol) {
    throw DegenerateShape("major_axis: top eigenvalues coincide, axis ill-defined");
  }
  Eigen::Vector3d m = eig.eigenvectors().col(2);
  int k;
  m.cwiseAbs().maxCoeff(&k);
  if (m[k] < 0) m = -m;
  return m;
}

double cosine_similarity_z(const ConstrainedDualQuadric& q, double gap_tol) {
  return std::abs(major_axis(q, gap_tol).z());
}

/* ************************************************************************* */
DualConic project_quadric(const Pose& x, const CameraIntrinsics& K,
                          const ConstrainedDualQuadric& q) {
  const Pose world_to_camera = x.inverse();
  const double depth = (world_to_camera.rotation() * q.centroid() +
                        world_to_camera.translation())
                           .z();
  if (depth <= kProjectionDepthEpsilon) {
    throw BehindCamera("project_quadric: quadric centroid behind the camera");
  }
  Eigen::Matrix<double, 3, 4> P;
  P.leftCols<3>() = world_to_camera.rotation();
  P.rightCols<1>() = world_to_camera.translation();
  P = K.matrix() * P;
  const Eigen::Matrix3d C = P * quadric_matrix(q) * P.transpose();
  return DualConic{0.5 * (C + C.transpose())};
}

BoundingBox2D conic_bbox(const DualConic& c, const CameraIntrinsics& /*K*/) {
  const Eigen::Matrix3d& C = c.matrix;
  if (std::abs(C(2, 2)) < 1e-12) {
    throw DegenerateConic("conic_bbox: conic not normalizable (C33 ~ 0)");
  }
  const Eigen::Matrix3d Cn = C / C(2, 2);
  const double dx = Cn(0, 2) * Cn(0, 2) - Cn(0, 0);
  const double dy = Cn(1, 2) * Cn(1, 2) - Cn(1, 1);
  if (dx <= 0 || dy <= 0) {
    throw DegenerateConic("conic_bbox: conic does not bound a real ellipse");
  }
  const double hx = std::sqrt(dx), hy = std::sqrt(dy);
  return BoundingBox2D(Cn(0, 2) - hx, Cn(1, 2) - hy, Cn(0, 2) + hx, Cn(1, 2) + hy);
}

Box3D quadric_aabb(const ConstrainedDualQuadric& q) {
  const Eigen::Matrix3d E = envelope_at_origin(q);
  return Box3D(q.centroid(), E.diagonal().cwiseMax(0.0).cwiseSqrt());
}

}  // namespace qslam
