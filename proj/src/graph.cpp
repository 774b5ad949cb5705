#include "qslam/graph.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>

namespace qslam {

namespace {
constexpr double kChi3Mean = 1.5957691216057308;
constexpr double kDegree = M_PI / 180.0;
constexpr int kPoseDim = 6;
constexpr int kQuadricDim = 9;
}  // namespace

bool FactorGraph::has_landmark(int id) const {
  return std::binary_search(landmark_ids.begin(), landmark_ids.end(), id);
}

std::size_t FactorGraph::factor_count() const {
  return odometry_factors.size() + box_factors.size() + orientation_factors.size() +
         (prior ? 1 : 0);
}

/* ************************************************************************* */
FactorGraph build_graph(const SimulatedDataset& dataset, const CategoryTable& table,
                        const GraphConfig& config) {
  const int n_poses = static_cast<int>(dataset.poses_gt.size());
  if (n_poses < 2) throw InconsistentDataset("build_graph: dataset needs at least two poses");
  if (dataset.odometry.size() + 1 != dataset.poses_gt.size()) {
    throw InconsistentDataset("build_graph: odometry count does not match pose count");
  }

  FactorGraph graph;
  graph.n_poses = n_poses;
  graph.intrinsics = dataset.intrinsics;

  for (std::size_t i = 0; i < dataset.odometry.size(); ++i) {
    const Pose& u = dataset.odometry[i];
    const double step_length = u.translation().norm();
    const double step_angle = log_so3(u.rotation()).norm();
    const double sigma_t = std::max(
        config.odometry_translation_fraction * step_length / kChi3Mean,
        config.min_odometry_sigma);
    const double sigma_r = std::max(
        config.odometry_rotation_fraction * std::max(step_angle, kDegree) / kChi3Mean,
        config.min_odometry_sigma);
    Eigen::VectorXd sigmas(6);
    sigmas << sigma_r, sigma_r, sigma_r, sigma_t, sigma_t, sigma_t;
    graph.odometry_factors.push_back(
        {static_cast<int>(i), static_cast<int>(i) + 1, u, NoiseModel::diagonal(sigmas)});
  }

  std::set<int> seen_ids;
  for (const auto& track : dataset.tracks) {
    if (!seen_ids.insert(track.id).second) {
      throw InconsistentDataset("build_graph: duplicate track id " + std::to_string(track.id));
    }
    for (const auto& det : track.detections) {
      if (det.pose_index < 0 || det.pose_index >= n_poses) {
        throw InconsistentDataset("build_graph: detection references pose " +
                                  std::to_string(det.pose_index));
      }
    }
    if (track.detections.empty()) {
      throw InconsistentDataset("build_graph: empty track " + std::to_string(track.id));
    }
    if (reject_high_variance(track, config.variance_threshold_px)) continue;

    graph.landmark_ids.push_back(track.id);
    for (const auto& det : track.detections) {
      graph.box_factors.push_back(
          {det.pose_index, track.id, det.box, NoiseModel::isotropic(4, config.box_sigma_px)});
    }
    if (config.orientation_factors) {
      const auto [label, scores] = aggregate_label(track);
      const OrientationTarget target = orientation_target(label, table);
      if (target.assigned()) {
        graph.orientation_factors.push_back(
            {track.id, target, NoiseModel::isotropic(1, config.orientation_sigma)});
      }
    }
  }
  std::sort(graph.landmark_ids.begin(), graph.landmark_ids.end());

  graph.prior = PriorFactor{0, dataset.poses_gt.front(),
                            NoiseModel::isotropic(6, config.prior_sigma)};
  return graph;
}

/* ************************************************************************* */
namespace {

Vector6d prior_residual(const Pose& x, const Pose& anchor) {
  return log_se3(anchor.inverse() * x);
}

const ConstrainedDualQuadric& quadric_at(const Values& values, int id) {
  const auto it = values.quadrics.find(id);
  if (it == values.quadrics.end()) {
    throw Error("values: missing quadric for landmark " + std::to_string(id));
  }
  return it->second;
}

void check_complete(const FactorGraph& graph, const Values& values) {
  if (static_cast<int>(values.poses.size()) != graph.n_poses) {
    throw Error("values: pose count does not match graph");
  }
  for (int id : graph.landmark_ids) quadric_at(values, id);
}

}  // namespace

namespace {

struct ErrorBreakdown {
  double error = 0.0;
  int degenerate_factors = 0;  // box/orientation factors that zeroed out
};

ErrorBreakdown error_breakdown(const FactorGraph& graph, const Values& values) {
  ErrorBreakdown out;
  for (const auto& f : graph.odometry_factors) {
    out.error += f.noise.squared_mahalanobis(
        odometry_residual(values.poses[f.pose_i], values.poses[f.pose_next], f.measured));
  }
  for (const auto& f : graph.box_factors) {
    try {
      out.error += f.noise.squared_mahalanobis(
          bbox_residual(values.poses[f.pose], quadric_at(values, f.landmark), f.measured,
                        graph.intrinsics));
    } catch (const BehindCamera&) {
      ++out.degenerate_factors;
    } catch (const DegenerateConic&) {
      ++out.degenerate_factors;
    }
  }
  for (const auto& f : graph.orientation_factors) {
    try {
      Eigen::VectorXd r(1);
      r << orientation_residual(quadric_at(values, f.landmark), f.target);
      out.error += f.noise.squared_mahalanobis(r);
    } catch (const DegenerateShape&) {
      ++out.degenerate_factors;
    }
  }
  if (graph.prior) {
    out.error += graph.prior->noise.squared_mahalanobis(
        prior_residual(values.poses[graph.prior->pose], graph.prior->anchor));
  }
  return out;
}

}  // namespace

double total_error(const FactorGraph& graph, const Values& values) {
  check_complete(graph, values);
  return error_breakdown(graph, values).error;
}

/* ************************************************************************* */
namespace {

// Dense normal equations with poses first and landmark blocks last, so the
// (block-diagonal) landmark part can be eliminated by a Schur complement.
struct Linearization {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;  // J^T W r; the step solves (H + damping) delta = -g
};

struct VariableLayout {
  int n_poses = 0;
  std::vector<int> landmark_ids;
  std::map<int, int> landmark_offset;

  int pose_offset(int i) const { return kPoseDim * i; }
  int offset_of_landmark(int id) const { return landmark_offset.at(id); }
  int pose_block_dim() const { return kPoseDim * n_poses; }
  int landmark_block_dim() const { return kQuadricDim * static_cast<int>(landmark_ids.size()); }
  int dim() const { return pose_block_dim() + landmark_block_dim(); }
};

VariableLayout make_layout(const FactorGraph& graph) {
  VariableLayout layout;
  layout.n_poses = graph.n_poses;
  layout.landmark_ids = graph.landmark_ids;
  int offset = layout.pose_block_dim();
  for (int id : layout.landmark_ids) {
    layout.landmark_offset[id] = offset;
    offset += kQuadricDim;
  }
  return layout;
}

Values retract_values(const Values& values, const VariableLayout& layout,
                      const Eigen::VectorXd& delta) {
  Values out = values;
  for (int i = 0; i < layout.n_poses; ++i) {
    out.poses[i] = values.poses[i].retract(delta.segment<kPoseDim>(layout.pose_offset(i)));
  }
  for (int id : layout.landmark_ids) {
    out.quadrics.at(id) =
        values.quadrics.at(id).retract(delta.segment<kQuadricDim>(layout.offset_of_landmark(id)));
  }
  return out;
}

// Adds one factor's whitened residual/Jacobians into H and g. Jacobian
// blocks are computed by central differences on each variable's tangent
// space while the others stay fixed.
void accumulate(Linearization& lin, const std::vector<int>& offsets,
                const std::vector<Eigen::MatrixXd>& jacobians, const Eigen::VectorXd& r) {
  for (std::size_t a = 0; a < offsets.size(); ++a) {
    lin.g.segment(offsets[a], jacobians[a].cols()) += jacobians[a].transpose() * r;
    for (std::size_t b = 0; b < offsets.size(); ++b) {
      lin.H.block(offsets[a], offsets[b], jacobians[a].cols(), jacobians[b].cols()) +=
          jacobians[a].transpose() * jacobians[b];
    }
  }
}

Linearization linearize(const FactorGraph& graph, const Values& values,
                        const VariableLayout& layout, double step) {
  Linearization lin;
  lin.H = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
  lin.g = Eigen::VectorXd::Zero(layout.dim());

  for (const auto& f : graph.odometry_factors) {
    const Pose& xi = values.poses[f.pose_i];
    const Pose& xj = values.poses[f.pose_next];
    const Eigen::VectorXd r = f.noise.whiten(odometry_residual(xi, xj, f.measured));
    const Eigen::MatrixXd Ji = f.noise.whiten_jacobian(numeric_jacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          return odometry_residual(xi.retract(d), xj, f.measured);
        },
        kPoseDim, step));
    const Eigen::MatrixXd Jj = f.noise.whiten_jacobian(numeric_jacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          return odometry_residual(xi, xj.retract(d), f.measured);
        },
        kPoseDim, step));
    accumulate(lin, {layout.pose_offset(f.pose_i), layout.pose_offset(f.pose_next)}, {Ji, Jj},
               r);
  }

  for (const auto& f : graph.box_factors) {
    const Pose& x = values.poses[f.pose];
    const ConstrainedDualQuadric& q = quadric_at(values, f.landmark);
    try {
      const Eigen::VectorXd r =
          f.noise.whiten(bbox_residual(x, q, f.measured, graph.intrinsics));
      const Eigen::MatrixXd Jx = f.noise.whiten_jacobian(numeric_jacobian(
          [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
            return bbox_residual(x.retract(d), q, f.measured, graph.intrinsics);
          },
          kPoseDim, step));
      const Eigen::MatrixXd Jq = f.noise.whiten_jacobian(numeric_jacobian(
          [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
            return bbox_residual(x, q.retract(d), f.measured, graph.intrinsics);
          },
          kQuadricDim, step));
      accumulate(lin, {layout.pose_offset(f.pose), layout.offset_of_landmark(f.landmark)},
                 {Jx, Jq}, r);
    } catch (const BehindCamera&) {
      // Degenerate at this linearization point: contributes nothing and the
      // geometry is free to recover on later iterations.
    } catch (const DegenerateConic&) {
    }
  }

  for (const auto& f : graph.orientation_factors) {
    const ConstrainedDualQuadric& q = quadric_at(values, f.landmark);
    try {
      Eigen::VectorXd r(1);
      r << orientation_residual(q, f.target);
      r = f.noise.whiten(r);
      const Eigen::MatrixXd Jq = f.noise.whiten_jacobian(numeric_jacobian(
          [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
            Eigen::VectorXd rr(1);
            rr << orientation_residual(q.retract(d), f.target);
            return rr;
          },
          kQuadricDim, step));
      accumulate(lin, {layout.offset_of_landmark(f.landmark)}, {Jq}, r);
    } catch (const DegenerateShape&) {
    }
  }

  if (graph.prior) {
    const Pose& x = values.poses[graph.prior->pose];
    const Eigen::VectorXd r = graph.prior->noise.whiten(prior_residual(x, graph.prior->anchor));
    const Eigen::MatrixXd J = graph.prior->noise.whiten_jacobian(numeric_jacobian(
        [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
          return prior_residual(x.retract(d), graph.prior->anchor);
        },
        kPoseDim, step));
    accumulate(lin, {layout.pose_offset(graph.prior->pose)}, {J}, r);
  }
  return lin;
}

// Solves (H + lambda * diag(H)) delta = -g, eliminating the block-diagonal
// landmark part first. Returns false on numerical failure.
bool solve_damped(const Linearization& lin, const VariableLayout& layout, double lambda,
                  Eigen::VectorXd& delta) {
  const int pd = layout.pose_block_dim();
  const int ld = layout.landmark_block_dim();
  const int n_landmarks = ld / kQuadricDim;

  Eigen::MatrixXd H = lin.H;
  for (int i = 0; i < H.rows(); ++i) {
    H(i, i) += lambda * std::max(lin.H(i, i), 1e-9);
  }

  const auto A = H.topLeftCorner(pd, pd);
  const auto B = H.topRightCorner(pd, ld);
  const auto C = H.bottomRightCorner(ld, ld);
  const Eigen::VectorXd gp = lin.g.head(pd);
  const Eigen::VectorXd gl = lin.g.tail(ld);

  // Blockwise inverse of the landmark part (no landmark-landmark factors).
  Eigen::MatrixXd Cinv_Bt = Eigen::MatrixXd::Zero(ld, pd);
  Eigen::VectorXd Cinv_gl = Eigen::VectorXd::Zero(ld);
  std::vector<Eigen::LDLT<Eigen::Matrix<double, kQuadricDim, kQuadricDim>>> block_ldlt;
  block_ldlt.reserve(n_landmarks);
  for (int k = 0; k < n_landmarks; ++k) {
    const int o = k * kQuadricDim;
    Eigen::Matrix<double, kQuadricDim, kQuadricDim> block =
        C.block<kQuadricDim, kQuadricDim>(o, o);
    block_ldlt.emplace_back(block);
    if (block_ldlt.back().info() != Eigen::Success) return false;
    Cinv_Bt.middleRows<kQuadricDim>(o) =
        block_ldlt.back().solve(B.middleCols<kQuadricDim>(o).transpose());
    Cinv_gl.segment<kQuadricDim>(o) = block_ldlt.back().solve(gl.segment<kQuadricDim>(o));
  }

  delta.resize(pd + ld);
  if (pd > 0) {
    const Eigen::MatrixXd S = A - B * Cinv_Bt;
    const Eigen::VectorXd rhs = -gp + B * Cinv_gl;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success) return false;
    delta.head(pd) = ldlt.solve(rhs);
  }
  const Eigen::VectorXd rhs_l = -gl - B.transpose() * delta.head(pd);
  for (int k = 0; k < n_landmarks; ++k) {
    const int o = k * kQuadricDim;
    delta.segment<kQuadricDim>(pd + o) = block_ldlt[k].solve(rhs_l.segment<kQuadricDim>(o));
  }
  return delta.allFinite();
}

}  // namespace

std::pair<Values, SolveStats> optimize(const FactorGraph& graph, const Values& initial,
                                       const SolverConfig& config) {
  check_complete(graph, initial);
  const VariableLayout layout = make_layout(graph);

  Values values = initial;
  SolveStats stats;
  ErrorBreakdown current = error_breakdown(graph, values);
  stats.initial_error = current.error;
  double lambda = config.initial_lambda;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    stats.iterations = iter + 1;
    if (current.error < 1e-15) {
      stats.termination = "converged";
      break;
    }
    const Linearization lin = linearize(graph, values, layout, config.jacobian_step);
    if (lin.g.lpNorm<Eigen::Infinity>() < config.gradient_tol) {
      stats.termination = "converged";
      break;
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::VectorXd delta;
      if (!solve_damped(lin, layout, lambda, delta)) {
        lambda *= config.lambda_factor;
        if (lambda > config.max_lambda) {
          throw SingularSystem("optimize: normal equations unsolvable despite damping");
        }
        continue;
      }
      // A candidate is accepted only if it strictly decreases the error
      // without silencing more factors than before; erasing a factor by
      // driving it degenerate is not a legitimate decrease.
      bool improves = false;
      ErrorBreakdown candidate_breakdown;
      Values candidate;
      if (delta.lpNorm<Eigen::Infinity>() <= config.max_step) {
        candidate = retract_values(values, layout, delta);
        candidate_breakdown = error_breakdown(graph, candidate);
        improves = std::isfinite(candidate_breakdown.error) &&
                   candidate_breakdown.error < current.error &&
                   candidate_breakdown.degenerate_factors <= current.degenerate_factors;
      }
      if (improves) {
        const double relative_decrease =
            (current.error - candidate_breakdown.error) / current.error;
        values = std::move(candidate);
        current = candidate_breakdown;
        lambda = std::max(lambda / config.lambda_factor, 1e-12);
        ++stats.accepted_steps;
        accepted = true;
        if (relative_decrease < config.relative_decrease_tol) {
          stats.termination = "converged";
        }
      } else {
        ++stats.rejected_steps;
        lambda *= config.lambda_factor;
        if (lambda > config.max_lambda) {
          stats.termination = "stalled";
          break;
        }
      }
    }
    if (!stats.termination.empty()) break;
  }

  if (stats.termination.empty()) stats.termination = "max_iterations";
  stats.final_error = current.error;
  return {values, stats};
}

/* ************************************************************************* */
Values retract_values(const FactorGraph& graph, const Values& values,
                      const Eigen::VectorXd& delta) {
  check_complete(graph, values);
  const VariableLayout layout = make_layout(graph);
  if (delta.size() != layout.dim()) throw Error("retract_values: delta dimension mismatch");
  return retract_values(values, layout, delta);
}

Eigen::VectorXd error_gradient(const FactorGraph& graph, const Values& values, double step) {
  check_complete(graph, values);
  const VariableLayout layout = make_layout(graph);
  return 2.0 * linearize(graph, values, layout, step).g;
}

/* ************************************************************************* */
std::vector<Pose> integrate_odometry(const Pose& start, const std::vector<Pose>& odometry) {
  std::vector<Pose> poses;
  poses.reserve(odometry.size() + 1);
  poses.push_back(start);
  for (const Pose& u : odometry) poses.push_back(apply_motion(poses.back(), u));
  return poses;
}

namespace {

// Coefficient row of pi^T Q pi = 0 in the 10 unique entries of symmetric Q,
// ordered (q00, q01, q02, q03, q11, q12, q13, q22, q23, q33).
Eigen::Matrix<double, 10, 1> plane_row(const Eigen::Vector4d& pi) {
  Eigen::Matrix<double, 10, 1> row;
  const double a = pi[0], b = pi[1], c = pi[2], d = pi[3];
  row << a * a, 2 * a * b, 2 * a * c, 2 * a * d, b * b, 2 * b * c, 2 * b * d, c * c, 2 * c * d,
      d * d;
  return row;
}

Eigen::Matrix4d symmetric_from_upper(const Eigen::Matrix<double, 10, 1>& v) {
  Eigen::Matrix4d Q;
  Q << v[0], v[1], v[2], v[3],
       v[1], v[4], v[5], v[6],
       v[2], v[5], v[7], v[8],
       v[3], v[6], v[8], v[9];
  return Q;
}

// World -> image projection for a camera-to-world pose, optionally with the
// world origin shifted to `center` for conditioning.
Eigen::Matrix<double, 3, 4> projection_matrix(const Pose& camera, const CameraIntrinsics& K,
                                              const Eigen::Vector3d& center) {
  const Pose wtc = camera.inverse();
  Eigen::Matrix<double, 3, 4> P;
  P.leftCols<3>() = wtc.rotation();
  P.rightCols<1>() = wtc.rotation() * center + wtc.translation();
  return K.matrix() * P;
}

// Least-squares intersection of the detection rays through the box centers.
Eigen::Vector3d triangulate_centroid(const std::vector<Pose>& poses,
                                     const DetectionTrack& track, const CameraIntrinsics& K) {
  const Eigen::Matrix3d Kinv = K.matrix().inverse();
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const auto& det : track.detections) {
    const Pose& cam = poses[det.pose_index];
    const Eigen::Vector2d c = det.box.center();
    const Eigen::Vector3d dir =
        (cam.rotation() * (Kinv * Eigen::Vector3d(c.x(), c.y(), 1.0))).normalized();
    const Eigen::Matrix3d M = Eigen::Matrix3d::Identity() - dir * dir.transpose();
    A += M;
    b += M * cam.translation();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A);
  if (eig.eigenvalues()[0] < 1e-8 * std::max(eig.eigenvalues()[2], 1e-12)) {
    throw Error("triangulate_centroid: rays do not intersect (degenerate views)");
  }
  const Eigen::Vector3d x = A.ldlt().solve(b);
  if (!x.allFinite()) throw Error("triangulate_centroid: solve failed");
  return x;
}

ConstrainedDualQuadric default_shape_at(const Eigen::Vector3d& centroid) {
  return ConstrainedDualQuadric(Eigen::Matrix3d::Identity(), centroid,
                                Eigen::Vector3d(0.2, 0.2, 0.2));
}

}  // namespace

ConstrainedDualQuadric initialize_quadric(const std::vector<Pose>& poses,
                                          const DetectionTrack& track,
                                          const CameraIntrinsics& K) {
  std::set<int> distinct;
  for (const auto& det : track.detections) {
    if (det.pose_index < 0 || det.pose_index >= static_cast<int>(poses.size())) {
      throw InconsistentDataset("initialize_quadric: detection references missing pose");
    }
    distinct.insert(det.pose_index);
  }
  if (distinct.size() < 3) {
    throw InsufficientViews("initialize_quadric: landmark needs >= 3 distinct views, has " +
                            std::to_string(distinct.size()));
  }

  // Recenter the world on a triangulated centroid so the plane system is
  // well-conditioned; planes are cheap to recompute if triangulation fails.
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  bool have_center = false;
  try {
    center = triangulate_centroid(poses, track, K);
    have_center = true;
  } catch (const Error&) {
  }

  Eigen::MatrixXd M(4 * track.detections.size(), 10);
  int row = 0;
  for (const auto& det : track.detections) {
    const Eigen::Matrix<double, 3, 4> P = projection_matrix(poses[det.pose_index], K, center);
    const Eigen::Vector3d lines[4] = {{1, 0, -det.box.xmin},
                                      {1, 0, -det.box.xmax},
                                      {0, 1, -det.box.ymin},
                                      {0, 1, -det.box.ymax}};
    for (const auto& l : lines) {
      Eigen::Vector4d pi = P.transpose() * l;
      const double norm = pi.norm();
      if (norm < 1e-12) throw Error("initialize_quadric: zero back-projected plane");
      M.row(row++) = plane_row(pi / norm).transpose();
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  const auto fallback = [&]() -> ConstrainedDualQuadric {
    return default_shape_at(triangulate_centroid(poses, track, K));
  };

  // Two vanishing singular values mean the envelope is not uniquely
  // determined (coplanar/degenerate views).
  if (sv[9] < 0 || sv[8] < 1e-9 * sv[0]) return fallback();

  Eigen::Matrix4d Q = symmetric_from_upper(svd.matrixV().col(9));
  if (std::abs(Q(3, 3)) < 1e-10 * Q.cwiseAbs().maxCoeff()) return fallback();
  Q /= -Q(3, 3);

  const Eigen::Vector3d t = -Q.topRightCorner<3, 1>();
  const Eigen::Matrix3d E = Q.topLeftCorner<3, 3>() + t * t.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(0.5 * (E + E.transpose()));
  Eigen::Vector3d lambda = eig.eigenvalues();
  for (int i = 0; i < 3; ++i) {
    if (lambda[i] <= 0) lambda[i] = 1e-4;  // nearest valid ellipsoid
  }
  Eigen::Matrix3d R = eig.eigenvectors();
  if (R.determinant() < 0) R.col(0) *= -1.0;

  const Eigen::Vector3d centroid = t + center;
  const Eigen::Vector3d radii = lambda.cwiseSqrt();
  if (!centroid.allFinite() || !radii.allFinite() || radii.maxCoeff() > 50.0) {
    return fallback();
  }

  // The estimate must at least sit in front of most of its cameras to be a
  // usable initial value.
  int in_front = 0;
  for (int pose_index : distinct) {
    const Pose wtc = poses[pose_index].inverse();
    if ((wtc.rotation() * centroid + wtc.translation()).z() > kProjectionDepthEpsilon) {
      ++in_front;
    }
  }
  if (2 * in_front <= static_cast<int>(distinct.size())) return fallback();

  return ConstrainedDualQuadric(R, centroid, radii);
}

QuadricInitialization initialize_quadrics(const std::vector<Pose>& poses,
                                          const std::vector<DetectionTrack>& tracks,
                                          const CameraIntrinsics& K) {
  QuadricInitialization result;
  for (const auto& track : tracks) {
    try {
      result.quadrics.emplace(track.id, initialize_quadric(poses, track, K));
    } catch (const Error&) {
      result.failed.push_back(track.id);
    }
  }
  return result;
}

/* ************************************************************************* */
Problem build_problem(const SimulatedDataset& dataset, const CategoryTable& table,
                      const GraphConfig& config) {
  Problem problem;
  problem.graph = build_graph(dataset, table, config);
  problem.initial.poses = integrate_odometry(dataset.poses_gt.front(), dataset.odometry);

  for (const auto& track : dataset.tracks) {
    if (!problem.graph.has_landmark(track.id)) problem.rejected_tracks.push_back(track.id);
  }

  std::vector<DetectionTrack> kept;
  for (const auto& track : dataset.tracks) {
    if (problem.graph.has_landmark(track.id)) kept.push_back(track);
  }
  QuadricInitialization init =
      initialize_quadrics(problem.initial.poses, kept, dataset.intrinsics);
  problem.initial.quadrics = std::move(init.quadrics);
  problem.uninitialized = init.failed;

  // Prune landmarks we could not initialize.
  for (int id : problem.uninitialized) {
    auto& ids = problem.graph.landmark_ids;
    ids.erase(std::remove(ids.begin(), ids.end(), id), ids.end());
    auto& boxes = problem.graph.box_factors;
    boxes.erase(std::remove_if(boxes.begin(), boxes.end(),
                               [&](const BoxFactor& f) { return f.landmark == id; }),
                boxes.end());
    auto& orients = problem.graph.orientation_factors;
    orients.erase(std::remove_if(orients.begin(), orients.end(),
                                 [&](const OrientationFactor& f) { return f.landmark == id; }),
                  orients.end());
  }

  for (const auto& f : problem.graph.orientation_factors) {
    problem.applied_targets[f.landmark] = f.target;
  }
  return problem;
}

}  // namespace qslam
