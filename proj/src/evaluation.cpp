#include "qslam/evaluation.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

namespace qslam {

double iou(const Box3D& a, const Box3D& b) {
  double intersection = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double lo = std::max(a.center[k] - a.half_extents[k], b.center[k] - b.half_extents[k]);
    const double hi = std::min(a.center[k] + a.half_extents[k], b.center[k] + b.half_extents[k]);
    if (hi <= lo) return 0.0;
    intersection *= hi - lo;
  }
  return intersection / (a.volume() + b.volume() - intersection);
}

double ate(const std::vector<Pose>& estimated, const std::vector<Pose>& ground_truth,
           bool align) {
  if (estimated.size() != ground_truth.size()) {
    throw LengthMismatch("ate: trajectory lengths differ");
  }
  if (estimated.size() < 2) throw LengthMismatch("ate: need at least two poses");
  const int n = static_cast<int>(estimated.size());

  Eigen::Matrix3Xd est(3, n), gt(3, n);
  for (int i = 0; i < n; ++i) {
    est.col(i) = estimated[i].translation();
    gt.col(i) = ground_truth[i].translation();
  }
  if (align) {
    const Eigen::Matrix4d T = Eigen::umeyama(est, gt, /*with_scaling=*/false);
    est = (T.topLeftCorner<3, 3>() * est).colwise() + Eigen::Vector3d(T.topRightCorner<3, 1>());
  }
  return std::sqrt((est - gt).colwise().squaredNorm().mean());
}

namespace {

const Box3D& truth_for(const std::map<int, Box3D>& truth, int id) {
  const auto it = truth.find(id);
  if (it == truth.end()) {
    throw UnmatchedLandmark("no ground-truth landmark with id " + std::to_string(id));
  }
  return it->second;
}

}  // namespace

double landmark_position_error(const std::map<int, ConstrainedDualQuadric>& estimates,
                               const std::map<int, Box3D>& truth) {
  if (estimates.empty()) throw UnmatchedLandmark("landmark_position_error: no estimates");
  double sum = 0;
  for (const auto& [id, q] : estimates) {
    sum += (q.centroid() - truth_for(truth, id).center).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

double landmark_shape_error(const std::map<int, ConstrainedDualQuadric>& estimates,
                            const std::map<int, Box3D>& truth) {
  if (estimates.empty()) throw UnmatchedLandmark("landmark_shape_error: no estimates");
  double sum = 0;
  for (const auto& [id, q] : estimates) {
    const Box3D est = quadric_aabb(q);
    const Box3D& gt = truth_for(truth, id);
    sum += 1.0 - iou(Box3D(Eigen::Vector3d::Zero(), est.half_extents),
                     Box3D(Eigen::Vector3d::Zero(), gt.half_extents));
  }
  return sum / static_cast<double>(estimates.size());
}

double landmark_quality_error(const std::map<int, ConstrainedDualQuadric>& estimates,
                              const std::map<int, Box3D>& truth) {
  if (estimates.empty()) throw UnmatchedLandmark("landmark_quality_error: no estimates");
  double sum = 0;
  for (const auto& [id, q] : estimates) {
    sum += 1.0 - iou(quadric_aabb(q), truth_for(truth, id));
  }
  return sum / static_cast<double>(estimates.size());
}

namespace {

double axis_deviation(const ConstrainedDualQuadric& q, const OrientationTarget& target) {
  const double c = std::clamp(cosine_similarity_z(q), 0.0, 1.0);
  return target.kind == OrientationKind::kVertical ? std::acos(c) : std::asin(c);
}

}  // namespace

double mean_axis_deviation(const std::map<int, ConstrainedDualQuadric>& estimates,
                           const std::map<int, OrientationTarget>& targets) {
  double sum = 0;
  int count = 0;
  for (const auto& [id, target] : targets) {
    if (!target.assigned()) continue;
    const auto it = estimates.find(id);
    if (it == estimates.end()) continue;
    try {
      sum += axis_deviation(it->second, target);
      ++count;
    } catch (const DegenerateShape&) {
    }
  }
  return count == 0 ? 0.0 : sum / count;
}

MetricReport evaluate(const std::vector<Pose>& estimated_poses,
                      const std::map<int, ConstrainedDualQuadric>& estimated_quadrics,
                      const std::vector<Pose>& gt_poses, const std::map<int, Box3D>& gt_boxes,
                      const std::map<int, OrientationTarget>& targets) {
  MetricReport report;
  report.ate_m = ate(estimated_poses, gt_poses);
  if (!estimated_quadrics.empty()) {
    report.landmark_position_m = landmark_position_error(estimated_quadrics, gt_boxes);
    report.landmark_shape = landmark_shape_error(estimated_quadrics, gt_boxes);
    report.landmark_quality = landmark_quality_error(estimated_quadrics, gt_boxes);
    report.axis_deviation_rad = mean_axis_deviation(estimated_quadrics, targets);
  }
  report.landmarks_evaluated = static_cast<int>(estimated_quadrics.size());
  report.landmarks_dropped =
      static_cast<int>(gt_boxes.size()) - static_cast<int>(estimated_quadrics.size());

  for (const auto& [id, q] : estimated_quadrics) {
    LandmarkMetrics m;
    m.id = id;
    const Box3D& gt = truth_for(gt_boxes, id);
    const Box3D est = quadric_aabb(q);
    m.position_m = (q.centroid() - gt.center).norm();
    m.shape = 1.0 - iou(Box3D(Eigen::Vector3d::Zero(), est.half_extents),
                        Box3D(Eigen::Vector3d::Zero(), gt.half_extents));
    m.quality = 1.0 - iou(est, gt);
    const auto t = targets.find(id);
    if (t != targets.end() && t->second.assigned()) {
      m.has_axis_target = true;
      try {
        m.axis_deviation_rad = axis_deviation(q, t->second);
      } catch (const DegenerateShape&) {
        m.has_axis_target = false;
      }
    }
    report.per_landmark.push_back(m);
  }
  return report;
}

}  // namespace qslam
