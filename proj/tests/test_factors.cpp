#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "qslam/factors.hpp"

using namespace qslam;

namespace {

// Forward-difference oracle used to cross-check the central-difference
// Jacobians at one tenth of their step.
template <typename Fn>
Eigen::MatrixXd forward_jacobian(Fn&& residual_of_delta, int dim, double step) {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd base = residual_of_delta(delta);
  Eigen::MatrixXd J(base.size(), dim);
  for (int k = 0; k < dim; ++k) {
    delta[k] = step;
    J.col(k) = (residual_of_delta(delta) - base) / step;
    delta[k] = 0.0;
  }
  return J;
}

double relative_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(a.norm(), 1.0);
}

ConstrainedDualQuadric quadric_ahead(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double depth = 4.0 + 3.0 * u(rng);
  const double major = 0.25 + 0.2 * u(rng);
  return ConstrainedDualQuadric(
      test::random_rotation(rng),
      Eigen::Vector3d((u(rng) - 0.5) * 0.3 * depth, (u(rng) - 0.5) * 0.2 * depth, depth),
      Eigen::Vector3d(major, major * (0.45 + 0.2 * u(rng)), major * (0.7 + 0.15 * u(rng))));
}

}  // namespace

TEST_CASE("NoiseModel whitening equals the Mahalanobis form") {
  Eigen::VectorXd sigmas(3);
  sigmas << 0.5, 2.0, 4.0;
  const NoiseModel noise = NoiseModel::diagonal(sigmas);
  Eigen::VectorXd r(3);
  r << 1.0, -2.0, 8.0;
  double expected = 0;
  for (int i = 0; i < 3; ++i) expected += (r[i] / sigmas[i]) * (r[i] / sigmas[i]);
  CHECK(noise.squared_mahalanobis(r) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(noise.whiten(r).squaredNorm() == noise.squared_mahalanobis(r));

  CHECK_THROWS_AS(NoiseModel::isotropic(3, 0.0), Error);
  CHECK_THROWS_AS(NoiseModel::isotropic(3, -1.0), Error);
}

TEST_CASE("OrientationTarget goals") {
  CHECK(OrientationTarget::vertical().goal() == 1.0);
  CHECK(OrientationTarget::horizontal().goal() == 0.0);
  CHECK_FALSE(OrientationTarget::unassigned().assigned());
  CHECK_THROWS_AS(OrientationTarget::unassigned().goal(), Error);
}

TEST_CASE("odometry_residual: zero at the prediction, offset norms") {
  std::mt19937_64 rng(5);
  const Pose x = test::random_pose(rng);
  const Pose u = test::random_pose(rng, 0.3);
  const Pose x_next = apply_motion(x, u);
  CHECK(odometry_residual(x, x_next, u).norm() < 1e-12);

  // Pure 0.1 m z-offset between prediction and x_next.
  const Pose x_off(x_next.rotation(),
                   x_next.translation() + x_next.rotation() * Eigen::Vector3d(0, 0, 0.1));
  const Vector6d r = odometry_residual(x, x_off, u);
  CHECK(r.head<3>().norm() < 1e-12);
  CHECK(r.tail<3>().norm() == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("odometry_residual invariant under left-composition by a common transform") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 30; ++i) {
    const Pose x_i = test::random_pose(rng);
    const Pose x_next = test::random_pose(rng);
    const Pose u = test::random_pose(rng, 0.3);
    const Pose T = test::random_pose(rng);
    const Vector6d a = odometry_residual(x_i, x_next, u);
    const Vector6d b = odometry_residual(T * x_i, T * x_next, u);
    CHECK((a - b).norm() < 1e-9);
  }
}

TEST_CASE("bbox_residual: exact box, pixel shifts, derived sphere values") {
  const CameraIntrinsics K;
  const Pose camera;
  std::mt19937_64 rng(15);
  const ConstrainedDualQuadric q = quadric_ahead(rng);
  const BoundingBox2D predicted = conic_bbox(project_quadric(camera, K, q), K);

  CHECK(bbox_residual(camera, q, predicted, K).norm() < 1e-12);

  const BoundingBox2D shifted(predicted.xmin + 2.0, predicted.ymin, predicted.xmax + 2.0,
                              predicted.ymax);
  CHECK(bbox_residual(camera, q, shifted, K).isApprox(Eigen::Vector4d(2, 0, 2, 0), 1e-9));

  // Unit sphere at depth 5: residual against the sampling-oracle box.
  const ConstrainedDualQuadric sphere(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, 5),
                                      Eigen::Vector3d::Ones());
  const BoundingBox2D oracle_box = test::sampled_projection_bbox(camera, K, sphere);
  CHECK(bbox_residual(camera, sphere, oracle_box, K).cwiseAbs().maxCoeff() < 0.1);

  const ConstrainedDualQuadric behind(Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, -5),
                                      Eigen::Vector3d::Ones());
  CHECK_THROWS_AS(bbox_residual(camera, behind, predicted, K), BehindCamera);
}

TEST_CASE("orientation_residual examples") {
  const ConstrainedDualQuadric vertical(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                                        Eigen::Vector3d(1, 2, 3));
  CHECK(orientation_residual(vertical, OrientationTarget::vertical()) == 0.0);

  const ConstrainedDualQuadric horizontal(Eigen::Matrix3d::Identity(),
                                          Eigen::Vector3d::Zero(), Eigen::Vector3d(3, 2, 1));
  CHECK(orientation_residual(horizontal, OrientationTarget::horizontal()) == 0.0);

  const ConstrainedDualQuadric tilted(rotation_from_euler_zyx({0, M_PI / 4, 0}),
                                      Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 1, 2));
  CHECK(orientation_residual(tilted, OrientationTarget::vertical()) ==
        doctest::Approx(0.29289322).epsilon(1e-7));

  const ConstrainedDualQuadric sphere;
  CHECK_THROWS_AS(orientation_residual(sphere, OrientationTarget::vertical()),
                  DegenerateShape);
  CHECK_THROWS_AS(orientation_residual(vertical, OrientationTarget::unassigned()), Error);
}

TEST_CASE("vertical and horizontal residuals always sum to one") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const ConstrainedDualQuadric q = test::random_quadric(rng);
    const double v = orientation_residual(q, OrientationTarget::vertical());
    const double h = orientation_residual(q, OrientationTarget::horizontal());
    CHECK(v - h == doctest::Approx(1.0).epsilon(1e-12));  // (1 - c) + c
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(h <= 0.0);
    CHECK(h >= -1.0);
  }
}

TEST_CASE("residuals are deterministic") {
  std::mt19937_64 rng(25);
  const Pose x = test::random_pose(rng);
  const Pose u = test::random_pose(rng, 0.2);
  const ConstrainedDualQuadric q = quadric_ahead(rng);
  const CameraIntrinsics K;
  const BoundingBox2D b(100, 100, 200, 200);

  CHECK(odometry_residual(x, x, u) == odometry_residual(x, x, u));
  CHECK(bbox_residual(Pose(), q, b, K) == bbox_residual(Pose(), q, b, K));
  CHECK(orientation_residual(q, OrientationTarget::vertical()) ==
        orientation_residual(q, OrientationTarget::vertical()));
}

TEST_CASE("numeric_jacobian recovers a linear map exactly") {
  Eigen::MatrixXd A(3, 4);
  A << 1, 2, 3, 4, -5, 6, 0.5, 1e3, 0, -2, 7, 0.25;
  const auto J = numeric_jacobian(
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return A * v; }, 4);
  CHECK((J - A).norm() < 1e-8);
}

TEST_CASE("numeric_jacobian of the orientation residual wrt translation is zero") {
  std::mt19937_64 rng(33);
  const ConstrainedDualQuadric q = test::random_quadric(rng);
  const auto J = numeric_jacobian(
      [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
        Vector9d delta = Vector9d::Zero();
        delta.segment<3>(3) = d;
        Eigen::VectorXd r(1);
        r << orientation_residual(q.retract(delta), OrientationTarget::vertical());
        return r;
      },
      3);
  CHECK(J.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("central Jacobians match forward differences with step/10") {
  std::mt19937_64 rng(45);
  const CameraIntrinsics K;
  const double step = kDefaultJacobianStep;

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Pose x_i = test::random_pose(rng, 0.5);
    const Pose u = test::random_pose(rng, 0.3);
    // States with a bounded prediction error, as the solver sees them; far
    // from the log map's antipodal singularity.
    Vector6d err;
    for (int k = 0; k < 6; ++k) err[k] = 0.3 * unit(rng);
    const Pose x_next = apply_motion(x_i, u).retract(err);

    const auto odo = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
      return odometry_residual(x_i.retract(d), x_next, u);
    };
    CHECK(relative_difference(numeric_jacobian(odo, 6, step),
                              forward_jacobian(odo, 6, step / 10)) < 1e-4);

    const ConstrainedDualQuadric q = quadric_ahead(rng);
    const BoundingBox2D measured(200, 150, 400, 330);
    const auto box_pose = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
      Vector6d delta = d;
      return bbox_residual(Pose().retract(delta), q, measured, K);
    };
    CHECK(relative_difference(numeric_jacobian(box_pose, 6, step),
                              forward_jacobian(box_pose, 6, step / 10)) < 1e-4);

    const auto box_quadric = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
      Vector9d delta = d;
      return bbox_residual(Pose(), q.retract(delta), measured, K);
    };
    CHECK(relative_difference(numeric_jacobian(box_quadric, 9, step),
                              forward_jacobian(box_quadric, 9, step / 10)) < 1e-4);

    const auto orient = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
      Vector9d delta = d;
      Eigen::VectorXd r(1);
      r << orientation_residual(q.retract(delta), OrientationTarget::vertical());
      return r;
    };
    CHECK(relative_difference(numeric_jacobian(orient, 9, step),
                              forward_jacobian(orient, 9, step / 10)) < 1e-4);
  }
}
