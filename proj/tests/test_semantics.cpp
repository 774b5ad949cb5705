#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "qslam/semantics.hpp"

using namespace qslam;

namespace {

DetectionTrack two_label_track(const std::vector<std::pair<double, double>>& scores) {
  DetectionTrack track;
  track.id = 0;
  track.vocabulary = {"bottle", "cup"};
  int pose = 0;
  for (const auto& [a, b] : scores) {
    Eigen::VectorXd s(2);
    s << a, b;
    track.detections.push_back({pose++, BoundingBox2D(0, 0, 10, 10), s});
  }
  return track;
}

DetectionTrack track_with_boxes(const std::vector<BoundingBox2D>& boxes) {
  DetectionTrack track;
  track.id = 0;
  track.vocabulary = {"bottle"};
  int pose = 0;
  for (const auto& b : boxes) {
    track.detections.push_back({pose++, b, Eigen::VectorXd::Ones(1)});
  }
  return track;
}

}  // namespace

TEST_CASE("aggregate_label: averaging and argmax") {
  const auto [label, mean] = aggregate_label(two_label_track({{0.9, 0.1}, {0.8, 0.2}}));
  CHECK(label == "bottle");
  CHECK(mean[0] == doctest::Approx(0.85).epsilon(1e-15));
  CHECK(mean[1] == doctest::Approx(0.15).epsilon(1e-15));

  const auto [single, _] = aggregate_label(two_label_track({{0.2, 0.8}}));
  CHECK(single == "cup");
}

TEST_CASE("aggregate_label: exact tie goes to the lexicographically smaller label") {
  const auto [label, mean] = aggregate_label(two_label_track({{0.6, 0.4}, {0.4, 0.6}}));
  CHECK(mean[0] == mean[1]);
  CHECK(label == "bottle");

  // Same tie with the vocabulary reversed still picks the smaller label.
  DetectionTrack reversed = two_label_track({{0.4, 0.6}, {0.6, 0.4}});
  reversed.vocabulary = {"cup", "bottle"};
  CHECK(aggregate_label(reversed).first == "bottle");
}

TEST_CASE("aggregate_label: empty track and permutation invariance") {
  DetectionTrack empty;
  empty.vocabulary = {"bottle"};
  CHECK_THROWS_AS(aggregate_label(empty), EmptyTrack);

  std::mt19937_64 rng(3);
  DetectionTrack track = two_label_track({{0.9, 0.1}, {0.3, 0.7}, {0.5, 0.5}, {0.2, 0.8}});
  const auto baseline = aggregate_label(track);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(track.detections.begin(), track.detections.end(), rng);
    const auto shuffled = aggregate_label(track);
    CHECK(shuffled.first == baseline.first);
    CHECK((shuffled.second - baseline.second).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("reject_high_variance: boundary is inclusive at 50 px") {
  CHECK_FALSE(reject_high_variance(track_with_boxes(
      {BoundingBox2D(0, 0, 80, 40), BoundingBox2D(10, 5, 90, 45)})));  // constant sizes

  // widths {100, 200}: population sigma exactly 50
  CHECK(reject_high_variance(track_with_boxes(
      {BoundingBox2D(0, 0, 100, 40), BoundingBox2D(0, 0, 200, 40)})));

  // widths sigma 49.9, heights sigma 10
  CHECK_FALSE(reject_high_variance(track_with_boxes(
      {BoundingBox2D(0, 0, 100, 40), BoundingBox2D(0, 0, 199.8, 60)})));

  CHECK_THROWS_AS(reject_high_variance(track_with_boxes({})), EmptyTrack);
}

TEST_CASE("reject_high_variance scales exactly with the coordinates") {
  const std::vector<BoundingBox2D> boxes = {BoundingBox2D(0, 0, 30, 20),
                                            BoundingBox2D(2, 1, 60, 80),
                                            BoundingBox2D(5, 2, 100, 30)};
  std::vector<BoundingBox2D> scaled;
  const double k = 3.0;
  for (const auto& b : boxes) {
    scaled.emplace_back(k * b.xmin, k * b.ymin, k * b.xmax, k * b.ymax);
  }
  for (double threshold : {5.0, 20.0, 35.0, 50.0}) {
    CHECK(reject_high_variance(track_with_boxes(boxes), threshold) ==
          reject_high_variance(track_with_boxes(scaled), k * threshold));
  }
}

TEST_CASE("orientation_target: built-in table fixtures") {
  const CategoryTable table = CategoryTable::defaults();
  CHECK(orientation_target("bottle", table).kind == OrientationKind::kVertical);
  CHECK(orientation_target("book", table).kind == OrientationKind::kHorizontal);
  CHECK(orientation_target("sports ball", table).kind == OrientationKind::kUnassigned);

  // Case-insensitive, and total on unknown labels.
  CHECK(orientation_target("Bottle", table).kind == OrientationKind::kVertical);
  CHECK(orientation_target("TV Monitor", table).kind == OrientationKind::kHorizontal);
  CHECK(orientation_target("zeppelin", table).kind == OrientationKind::kUnassigned);
  CHECK(orientation_target("", table).kind == OrientationKind::kUnassigned);
}

TEST_CASE("category table file round trip and shipped defaults") {
  const CategoryTable defaults = CategoryTable::defaults();
  const auto tmp = std::filesystem::temp_directory_path() / "qslam_categories_test.tsv";
  defaults.save(tmp);
  const CategoryTable loaded = CategoryTable::load(tmp);
  CHECK(loaded.entries() == defaults.entries());
  std::filesystem::remove(tmp);

  // The data file shipped with the project reproduces the built-in table.
  const CategoryTable shipped = CategoryTable::load(std::string(QSLAM_DATA_DIR) +
                                                    "/categories.tsv");
  CHECK(shipped.entries() == defaults.entries());
}

TEST_CASE("malformed category files are rejected") {
  const auto tmp = std::filesystem::temp_directory_path() / "qslam_categories_bad.tsv";
  {
    std::ofstream out(tmp);
    out << "bottle vertical\n";  // space, not tab
  }
  CHECK_THROWS_AS(CategoryTable::load(tmp), Error);
  {
    std::ofstream out(tmp);
    out << "bottle\tdiagonal\n";
  }
  CHECK_THROWS_AS(CategoryTable::load(tmp), Error);
  std::filesystem::remove(tmp);
}
