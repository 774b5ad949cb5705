#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qslam/factors.hpp"
#include "qslam/geometry.hpp"

namespace qslam {

// Maps object class labels to the orientation prior applied to their
// landmarks. Labels are matched case-insensitively; unknown labels are
// Unassigned.
class CategoryTable {
 public:
  CategoryTable() = default;

  // Built-in assignments for the common indoor detector classes.
  static CategoryTable defaults();

  // Line-oriented UTF-8 text: `label<TAB>horizontal|vertical|unassigned`.
  // Blank lines and lines starting with '#' are skipped.
  static CategoryTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void assign(std::string_view label, OrientationKind kind);
  OrientationKind lookup(std::string_view label) const;

  std::size_t size() const { return table_.size(); }
  const std::map<std::string, OrientationKind>& entries() const { return table_; }

 private:
  std::map<std::string, OrientationKind> table_;  // lowercased labels
};

OrientationTarget orientation_target(std::string_view label, const CategoryTable& table);

struct TrackDetection {
  int pose_index = 0;
  BoundingBox2D box;
  Eigen::VectorXd scores;  // one entry per vocabulary label, in [0, 1]
};

// All detections associated with one physical object across frames.
struct DetectionTrack {
  int id = 0;
  std::vector<std::string> vocabulary;
  std::vector<TrackDetection> detections;
};

// Mean of the detection score vectors and the argmax label (lexicographically
// smallest label on ties). Throws EmptyTrack.
std::pair<std::string, Eigen::VectorXd> aggregate_label(const DetectionTrack& track);

inline constexpr double kDefaultVarianceRejectPx = 50.0;

// True iff the population standard deviation of the box widths or heights
// reaches the threshold; such tracks are dropped entirely.
bool reject_high_variance(const DetectionTrack& track,
                          double threshold_px = kDefaultVarianceRejectPx);

std::string to_lower(std::string_view s);
std::string_view to_string(OrientationKind kind);
OrientationKind orientation_kind_from_string(std::string_view s);

}  // namespace qslam
