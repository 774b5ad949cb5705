#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qslam/factors.hpp"
#include "qslam/geometry.hpp"

namespace qslam {

// Intersection over union of two axis-aligned boxes; in [0, 1].
double iou(const Box3D& a, const Box3D& b);

// RMSE of translational residuals, by default after a closed-form rigid
// (rotation + translation, no scale) alignment of the estimate onto the
// ground truth. Throws LengthMismatch.
double ate(const std::vector<Pose>& estimated, const std::vector<Pose>& ground_truth,
           bool align = true);

// RMSE over landmarks of centroid distances. Every estimated landmark must
// have a matching ground-truth id (UnmatchedLandmark otherwise).
double landmark_position_error(const std::map<int, ConstrainedDualQuadric>& estimates,
                               const std::map<int, Box3D>& truth);

// Mean Jaccard distance between the origin-centered estimated envelope and
// the origin-centered ground-truth box.
double landmark_shape_error(const std::map<int, ConstrainedDualQuadric>& estimates,
                            const std::map<int, Box3D>& truth);

// Mean Jaccard distance between the boxes in place (position + shape +
// orientation all contribute).
double landmark_quality_error(const std::map<int, ConstrainedDualQuadric>& estimates,
                              const std::map<int, Box3D>& truth);

// Angle between each estimated major axis and its semantic prior direction:
// the angle to the z-axis for vertical targets, the elevation out of the
// xy-plane for horizontal ones. Mean over landmarks with assigned targets;
// 0 when none (or when an axis is degenerate).
double mean_axis_deviation(const std::map<int, ConstrainedDualQuadric>& estimates,
                           const std::map<int, OrientationTarget>& targets);

struct LandmarkMetrics {
  int id = 0;
  double position_m = 0;
  double shape = 0;
  double quality = 0;
  double axis_deviation_rad = 0;
  bool has_axis_target = false;
};

struct MetricReport {
  double ate_m = 0;
  double landmark_position_m = 0;
  double landmark_shape = 0;   // Jaccard distance, [0, 1]
  double landmark_quality = 0;  // Jaccard distance, [0, 1]
  double axis_deviation_rad = 0;
  int landmarks_evaluated = 0;
  int landmarks_dropped = 0;
  std::vector<LandmarkMetrics> per_landmark;

  // Trial metadata.
  std::uint64_t seed = 0;
  std::string config_hash;
};

MetricReport evaluate(const std::vector<Pose>& estimated_poses,
                      const std::map<int, ConstrainedDualQuadric>& estimated_quadrics,
                      const std::vector<Pose>& gt_poses, const std::map<int, Box3D>& gt_boxes,
                      const std::map<int, OrientationTarget>& targets);

}  // namespace qslam
