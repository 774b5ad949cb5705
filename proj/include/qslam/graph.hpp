#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qslam/factors.hpp"
#include "qslam/geometry.hpp"
#include "qslam/semantics.hpp"
#include "qslam/simulator.hpp"

namespace qslam {

struct OdometryFactor {
  int pose_i = 0;
  int pose_next = 0;
  Pose measured;
  NoiseModel noise;
};

struct BoxFactor {
  int pose = 0;
  int landmark = 0;
  BoundingBox2D measured;
  NoiseModel noise;
};

struct OrientationFactor {
  int landmark = 0;
  OrientationTarget target;
  NoiseModel noise;
};

struct PriorFactor {
  int pose = 0;
  Pose anchor;
  NoiseModel noise;
};

// Factors over pose variables x_0..x_{n-1} and quadric landmarks keyed by
// track id. At most one orientation factor per landmark.
struct FactorGraph {
  int n_poses = 0;
  std::vector<int> landmark_ids;  // ascending
  CameraIntrinsics intrinsics;

  std::vector<OdometryFactor> odometry_factors;
  std::vector<BoxFactor> box_factors;
  std::vector<OrientationFactor> orientation_factors;
  std::optional<PriorFactor> prior;

  bool has_landmark(int id) const;
  std::size_t factor_count() const;
};

// Complete assignment for all graph variables.
struct Values {
  std::vector<Pose> poses;
  std::map<int, ConstrainedDualQuadric> quadrics;
};

struct GraphConfig {
  // Per-step odometry sigmas are derived from the measured step magnitudes
  // with the same fractional scaling the simulator applies.
  double odometry_translation_fraction = 0.05;
  double odometry_rotation_fraction = 0.15;
  double min_odometry_sigma = 1e-6;

  double box_sigma_px = 4.0;
  double orientation_sigma = 0.1;
  bool orientation_factors = true;

  double variance_threshold_px = kDefaultVarianceRejectPx;
  double prior_sigma = 1e-6;
};

// Assembles the factor graph for a dataset: one odometry factor per
// consecutive pose pair, one box factor per detection of each accepted
// track, one orientation factor per landmark with an assigned semantic
// target, and a strong prior anchoring the first pose. Tracks whose box
// width or height standard deviation reaches the rejection threshold are
// dropped entirely. Throws InconsistentDataset on dangling references.
FactorGraph build_graph(const SimulatedDataset& dataset, const CategoryTable& table,
                        const GraphConfig& config);

// Sum of whitened squared residuals over all factors. Box factors that are
// degenerate at the given values (behind camera / no real ellipse)
// contribute zero.
double total_error(const FactorGraph& graph, const Values& values);

enum class DegenerateFactorPolicy { kZeroOut };
enum class RobustKernel { kNone };

struct SolverConfig {
  int max_iterations = 100;
  double initial_lambda = 1e-4;
  double lambda_factor = 10.0;       // x on reject, / on accept
  double relative_decrease_tol = 1e-6;
  double jacobian_step = kDefaultJacobianStep;
  double gradient_tol = 1e-10;
  double max_lambda = 1e12;
  // Steps larger than this (infinity norm on the stacked tangent) are
  // rejected outright. Keeps the solver from teleporting a landmark into a
  // degenerate configuration whose box factors would silently zero out.
  double max_step = 10.0;
  DegenerateFactorPolicy degenerate_policy = DegenerateFactorPolicy::kZeroOut;
  RobustKernel robust_kernel = RobustKernel::kNone;  // stub; no kernel applied
};

struct SolveStats {
  int iterations = 0;
  int accepted_steps = 0;
  int rejected_steps = 0;
  double initial_error = 0.0;
  double final_error = 0.0;
  std::string termination;  // converged | max_iterations | stalled
};

// Levenberg-Marquardt on the graph. Accepted steps never increase the total
// error; landmark blocks are eliminated via a Schur complement before the
// pose system is solved. Deterministic for identical inputs. Throws
// SingularSystem when the damped normal equations stay unsolvable.
std::pair<Values, SolveStats> optimize(const FactorGraph& graph, const Values& initial,
                                       const SolverConfig& config = {});

// Applies a stacked tangent-space step (poses first, then landmarks in
// ascending id order) through each variable's retraction.
Values retract_values(const FactorGraph& graph, const Values& values,
                      const Eigen::VectorXd& delta);

// Gradient of total_error on the stacked tangent space, from the same
// linearization the solver uses; exposed for validation.
Eigen::VectorXd error_gradient(const FactorGraph& graph, const Values& values,
                               double step = kDefaultJacobianStep);

// Initial pose values: odometry integrated from the dataset's first pose.
std::vector<Pose> integrate_odometry(const Pose& start, const std::vector<Pose>& odometry);

// Initializes one quadric from its track: back-projects the four box edges
// of every detection to tangent planes and solves the linear envelope
// system for the dual quadric, then projects onto the constrained
// (ellipsoid) parametrization. Falls back to ray-triangulated centroid with
// a default shape when the linear system is degenerate. Throws
// InsufficientViews for tracks seen from fewer than 3 distinct poses.
ConstrainedDualQuadric initialize_quadric(const std::vector<Pose>& poses,
                                          const DetectionTrack& track,
                                          const CameraIntrinsics& K);

struct QuadricInitialization {
  std::map<int, ConstrainedDualQuadric> quadrics;
  std::vector<int> failed;  // landmark ids marked uninitializable
};

QuadricInitialization initialize_quadrics(const std::vector<Pose>& poses,
                                          const std::vector<DetectionTrack>& tracks,
                                          const CameraIntrinsics& K);

// Graph + complete initial values for one dataset; landmarks that fail
// initialization are pruned from the graph.
struct Problem {
  FactorGraph graph;
  Values initial;
  std::vector<int> rejected_tracks;      // variance rule
  std::vector<int> uninitialized;        // initialization failures
  std::map<int, OrientationTarget> applied_targets;  // audit log
};

Problem build_problem(const SimulatedDataset& dataset, const CategoryTable& table,
                      const GraphConfig& config);

}  // namespace qslam
