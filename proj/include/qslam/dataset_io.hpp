#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qslam/graph.hpp"
#include "qslam/simulator.hpp"

namespace qslam::io {

inline constexpr int kDatasetFormatVersion = 1;

// Pose record on disk: translation xyz followed by unit quaternion wxyz,
// canonicalized so the first nonzero quaternion component is positive.
nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const SimulatedDataset& dataset);
SimulatedDataset dataset_from_json(const nlohmann::json& j);

void save_dataset(const SimulatedDataset& dataset, const std::filesystem::path& path);
SimulatedDataset load_dataset(const std::filesystem::path& path);

// Round-trips the dataset through its JSON encoding, so an in-memory
// pipeline operates on exactly the numbers a consumer of save_dataset's
// output would parse. (Write the raw dataset to disk; canonicalize when
// consuming.)
SimulatedDataset canonicalized(const SimulatedDataset& dataset);

// Solver output for one trial.
struct Estimate {
  std::vector<Pose> poses;
  std::map<int, ConstrainedDualQuadric> quadrics;
  SolveStats stats;
  std::string config_hash;
};

nlohmann::json estimate_to_json(const Estimate& estimate);
Estimate estimate_from_json(const nlohmann::json& j);

void save_estimate(const Estimate& estimate, const std::filesystem::path& path);
Estimate load_estimate(const std::filesystem::path& path);

// FNV-1a over the canonical text, as a 16-hex-digit string; stamped into
// every output file so results can be traced to a configuration.
std::string fnv1a_hex(const std::string& text);

}  // namespace qslam::io
