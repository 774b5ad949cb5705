#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qslam/dataset_io.hpp"
#include "qslam/evaluation.hpp"
#include "qslam/graph.hpp"
#include "qslam/simulator.hpp"

namespace qslam {

// Full description of a batch run: either a set of dataset files or a
// simulated protocol of `trajectories` x `seeds` trials.
struct ExperimentConfig {
  int trajectories = 50;
  int seeds = 5;
  int objects = 8;
  int poses = 40;
  int trajectories_per_scene = 5;
  std::uint64_t base_seed = 0;
  NoiseConfig noise;  // per-trial seeds are derived from base_seed
  double confusion_rate = 0.0;
  CameraIntrinsics intrinsics;

  GraphConfig graph;
  SolverConfig solver;
  bool paired = false;  // run every trial with orientation factors off and on

  std::vector<std::string> dataset_paths;  // nonempty: load instead of simulate
  std::string category_table_path;         // empty: built-in table
  std::string output_dir;                  // empty: keep results in memory only
  int threads = 0;                         // 0: QUADRIC_ORIENT_THREADS or hardware
};

nlohmann::json config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

// Dataset parameters for one (trajectory, seed) trial of the protocol.
// Shared by the batch runner and the `simulate` command so a dataset written
// to disk reproduces the in-memory trial exactly.
DatasetConfig trial_dataset_config(const ExperimentConfig& config, int trajectory, int seed);

struct TrialResult {
  int trajectory = 0;
  int seed = 0;
  bool orientation_factors = false;
  MetricReport metrics;
  SolveStats stats;
  io::Estimate estimate;
  std::vector<int> rejected_tracks;
  std::vector<int> uninitialized;
  std::string error;  // nonempty when the trial failed
};

// Mean (and population standard deviation, reported as an extension) of the
// scalar metrics over the successful trials of one toggle setting.
struct TrialAggregate {
  bool orientation_factors = false;
  int trials = 0;
  double ate_m = 0;
  double landmark_position_m = 0;
  double landmark_shape = 0;
  double landmark_quality = 0;
  double axis_deviation_rad = 0;
  double ate_m_std = 0;
  double landmark_position_m_std = 0;
  double landmark_shape_std = 0;
  double landmark_quality_std = 0;
  double axis_deviation_rad_std = 0;
};

struct TrialsOutput {
  std::vector<TrialResult> results;  // deterministic trial order
  std::vector<TrialAggregate> aggregates;
  std::string hash;

  bool all_succeeded() const;
  std::string csv() const;
  nlohmann::json to_json() const;
};

// Runs every (trajectory, seed) trial (optionally paired off/on), evaluates
// against ground truth, and writes trials.csv, trials.json and one estimate
// file per trial into output_dir when set. Trials run on a bounded worker
// pool; results and file contents are deterministic for a given config.
TrialsOutput run_trials(const ExperimentConfig& config);

struct SweepPoint {
  double sigma = 0;
  double mean_ate_m = 0;
  TrialsOutput trials;
};

struct SweepOutput {
  std::vector<SweepPoint> points;
  std::string hash;

  std::string csv() const;
  std::string svg() const;  // log-x line plot, byte-reproducible
};

// run_trials once per sigma with orientation factors enabled.
SweepOutput sweep_sigma(const ExperimentConfig& config, const std::vector<double>& sigmas);

// CSV rendering of a previously written trials.json (for `report`).
std::string trials_csv_from_json(const nlohmann::json& j);

}  // namespace qslam
