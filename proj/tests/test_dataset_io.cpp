#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "qslam/dataset_io.hpp"

using namespace qslam;

namespace {
DatasetConfig tiny_config() {
  DatasetConfig config;
  config.n_objects = 3;
  config.n_poses = 10;
  config.scene_seed = 5;
  config.trajectory_seed = 6;
  config.noise.seed = 7;
  return config;
}
}  // namespace

TEST_CASE("pose records are 7-value translation + wxyz quaternion") {
  const Pose p(rotation_from_euler_zyx({0.1, -0.2, 0.3}), Eigen::Vector3d(1, 2, 3));
  const nlohmann::json j = io::pose_to_json(p);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 7);
  CHECK(j[0].get<double>() == 1.0);
  CHECK(j[1].get<double>() == 2.0);
  CHECK(j[2].get<double>() == 3.0);
  // Unit quaternion with canonical (positive leading) sign.
  const double n = j[3].get<double>() * j[3].get<double>() +
                   j[4].get<double>() * j[4].get<double>() +
                   j[5].get<double>() * j[5].get<double>() +
                   j[6].get<double>() * j[6].get<double>();
  CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j[3].get<double>() > 0);

  const Pose back = io::pose_from_json(j);
  CHECK((back.matrix() - p.matrix()).norm() < 1e-12);
}

TEST_CASE("canonicalized equals what a consumer of the saved file parses") {
  const SimulatedDataset dataset = make_dataset(tiny_config());
  const auto path = std::filesystem::temp_directory_path() / "qslam_canonical_test.json";
  io::save_dataset(dataset, path);
  const SimulatedDataset loaded = io::load_dataset(path);
  std::filesystem::remove(path);

  const SimulatedDataset canonical = io::canonicalized(dataset);
  REQUIRE(loaded.poses_gt.size() == canonical.poses_gt.size());
  for (std::size_t i = 0; i < loaded.poses_gt.size(); ++i) {
    CHECK((loaded.poses_gt[i].matrix() - canonical.poses_gt[i].matrix()).norm() == 0.0);
    if (i < loaded.odometry.size()) {
      CHECK((loaded.odometry[i].matrix() - canonical.odometry[i].matrix()).norm() == 0.0);
    }
  }
  for (std::size_t i = 0; i < loaded.tracks.size(); ++i) {
    for (std::size_t k = 0; k < loaded.tracks[i].detections.size(); ++k) {
      CHECK(loaded.tracks[i].detections[k].box.vector() ==
            canonical.tracks[i].detections[k].box.vector());
    }
  }
}

TEST_CASE("dataset save/load round trip preserves every field") {
  const SimulatedDataset dataset = make_dataset(tiny_config());
  const auto path = std::filesystem::temp_directory_path() / "qslam_dataset_test.json";
  io::save_dataset(dataset, path);
  const SimulatedDataset loaded = io::load_dataset(path);
  std::filesystem::remove(path);

  REQUIRE(loaded.poses_gt.size() == dataset.poses_gt.size());
  for (std::size_t i = 0; i < loaded.poses_gt.size(); ++i) {
    // Rotations pass through a quaternion on disk; translations are exact.
    CHECK((loaded.poses_gt[i].matrix() - dataset.poses_gt[i].matrix()).norm() < 1e-14);
    CHECK(loaded.poses_gt[i].translation() == dataset.poses_gt[i].translation());
  }
  REQUIRE(loaded.tracks.size() == dataset.tracks.size());
  for (std::size_t i = 0; i < loaded.tracks.size(); ++i) {
    CHECK(loaded.tracks[i].id == dataset.tracks[i].id);
    CHECK(loaded.tracks[i].vocabulary == dataset.tracks[i].vocabulary);
    REQUIRE(loaded.tracks[i].detections.size() == dataset.tracks[i].detections.size());
    for (std::size_t k = 0; k < loaded.tracks[i].detections.size(); ++k) {
      CHECK(loaded.tracks[i].detections[k].box.vector() ==
            dataset.tracks[i].detections[k].box.vector());  // bitwise
      CHECK(loaded.tracks[i].detections[k].scores == dataset.tracks[i].detections[k].scores);
    }
  }
  REQUIRE(loaded.landmarks_gt.size() == dataset.landmarks_gt.size());
  for (std::size_t i = 0; i < loaded.landmarks_gt.size(); ++i) {
    CHECK(loaded.landmarks_gt[i].label == dataset.landmarks_gt[i].label);
    CHECK(loaded.landmarks_gt[i].box.center == dataset.landmarks_gt[i].box.center);
    CHECK(loaded.landmarks_gt[i].box.half_extents == dataset.landmarks_gt[i].box.half_extents);
  }
}

TEST_CASE("malformed dataset files raise InconsistentDataset") {
  CHECK_THROWS_AS(io::load_dataset("/nonexistent/qslam.json"), InconsistentDataset);

  const auto path = std::filesystem::temp_directory_path() / "qslam_bad_dataset.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(io::load_dataset(path), InconsistentDataset);
  {
    std::ofstream out(path);
    out << R"({"format": 99})";
  }
  CHECK_THROWS_AS(io::load_dataset(path), InconsistentDataset);
  {
    std::ofstream out(path);
    out << R"({"format": 1, "intrinsics": {"fx": -1, "fy": 1, "cx": 1, "cy": 1,
               "width": 2, "height": 2}})";
  }
  CHECK_THROWS_AS(io::load_dataset(path), InconsistentDataset);
  std::filesystem::remove(path);
}

TEST_CASE("estimate save/load round trip") {
  io::Estimate estimate;
  estimate.poses = {Pose(), Pose(rotation_from_euler_zyx({0, 0, 1}),
                                 Eigen::Vector3d(1, 0, 0))};
  estimate.quadrics.emplace(
      3, ConstrainedDualQuadric(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 2, 3),
                                Eigen::Vector3d(0.2, 0.3, 0.4)));
  estimate.stats.iterations = 12;
  estimate.stats.final_error = 0.5;
  estimate.stats.termination = "converged";
  estimate.config_hash = "deadbeefdeadbeef";

  const auto path = std::filesystem::temp_directory_path() / "qslam_estimate_test.json";
  io::save_estimate(estimate, path);
  const io::Estimate loaded = io::load_estimate(path);
  std::filesystem::remove(path);

  CHECK(loaded.config_hash == estimate.config_hash);
  CHECK(loaded.poses.size() == 2);
  CHECK(loaded.quadrics.count(3) == 1);
  CHECK(loaded.stats.iterations == 12);
  CHECK(loaded.stats.termination == "converged");
  CHECK(io::estimate_to_json(loaded).dump() == io::estimate_to_json(estimate).dump());
}

TEST_CASE("fnv1a hash: fixed width, deterministic, content sensitive") {
  const std::string a = io::fnv1a_hex("quadric");
  CHECK(a.size() == 16);
  CHECK(a == io::fnv1a_hex("quadric"));
  CHECK(a != io::fnv1a_hex("quadrics"));
  CHECK(io::fnv1a_hex("") == "cbf29ce484222325");  // FNV-1a offset basis
}
