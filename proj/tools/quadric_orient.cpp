// Command-line driver: dataset simulation, batch solving with or without
// semantic orientation factors, evaluation, sigma sweeps and report
// re-emission.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qslam/experiment.hpp"

namespace {

// Exit codes: 0 success, 2 config error, 3 dataset error, 4 solver failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDataset = 3;
constexpr int kExitSolver = 4;

std::vector<double> parse_sigmas(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

void add_protocol_options(CLI::App* cmd, qslam::ExperimentConfig& config) {
  cmd->add_option("--trajectories", config.trajectories, "Trajectories in the protocol");
  cmd->add_option("--seeds", config.seeds, "Noise seeds per trajectory");
  cmd->add_option("--objects", config.objects, "Objects per scene");
  cmd->add_option("--poses", config.poses, "Poses per trajectory");
  cmd->add_option("--base-seed", config.base_seed, "Base seed for all trial streams");
  cmd->add_option("--trans-noise", config.noise.translation_fraction,
                  "Odometry translation noise fraction");
  cmd->add_option("--rot-noise", config.noise.rotation_fraction,
                  "Odometry rotation noise fraction");
  cmd->add_option("--box-noise", config.noise.box_sigma_px, "Detection noise sigma [px]");
  cmd->add_option("--confusion", config.confusion_rate, "Detection misclassification rate");
}

void add_solver_options(CLI::App* cmd, qslam::ExperimentConfig& config) {
  cmd->add_option("--categories", config.category_table_path,
                  "Category table file (defaults to the built-in table)");
  cmd->add_option("--sigma-orient", config.graph.orientation_sigma,
                  "Orientation factor sigma");
  cmd->add_flag_callback(
      "--no-orientation-factors",
      [&config]() { config.graph.orientation_factors = false; },
      "Solve without semantic orientation factors");
  cmd->add_option("--max-iterations", config.solver.max_iterations, "Solver iteration cap");
  cmd->add_option("--threads", config.threads,
                  "Worker threads (default: QUADRIC_ORIENT_THREADS or hardware)");
}

int classify(const std::exception& e) {
  if (dynamic_cast<const qslam::InconsistentDataset*>(&e)) return kExitDataset;
  if (dynamic_cast<const qslam::SingularSystem*>(&e)) return kExitSolver;
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-quadric landmark SLAM with semantic orientation priors"};
  app.require_subcommand(1);

  qslam::ExperimentConfig config;
  config.trajectories = 10;  // desk-scale default; pass 50 x 5 for the full protocol
  config.seeds = 3;

  // --- simulate ---
  auto* simulate = app.add_subcommand("simulate", "Generate one dataset file");
  std::string sim_out;
  int sim_trajectory_index = 0, sim_seed_index = 0;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--seed", sim_seed, "Base seed")->required();
  simulate->add_option("--objects", config.objects, "Objects in the scene");
  simulate->add_option("--poses", config.poses, "Poses in the trajectory");
  simulate->add_option("--trajectory-index", sim_trajectory_index,
                       "Protocol trajectory index this file reproduces");
  simulate->add_option("--seed-index", sim_seed_index, "Protocol seed index");
  simulate->add_option("--trans-noise", config.noise.translation_fraction, "");
  simulate->add_option("--rot-noise", config.noise.rotation_fraction, "");
  simulate->add_option("--box-noise", config.noise.box_sigma_px, "");
  simulate->add_option("--confusion", config.confusion_rate, "");
  simulate->add_option("--out", sim_out, "Output dataset path")->required();

  // --- solve ---
  auto* solve = app.add_subcommand(
      "solve", "Run trials (from dataset files or the simulated protocol) and evaluate");
  solve->add_option("--dataset", config.dataset_paths, "Dataset file(s); repeatable");
  add_protocol_options(solve, config);
  add_solver_options(solve, config);
  solve->add_flag("--paired", config.paired,
                  "Run every trial both without and with orientation factors");
  solve->add_option("--out", config.output_dir, "Output directory")->required();

  // --- eval ---
  auto* eval = app.add_subcommand("eval", "Evaluate an estimate file against a dataset");
  std::string eval_estimate, eval_truth, eval_categories;
  bool eval_no_align = false;
  eval->add_option("--estimate", eval_estimate, "Estimate file")->required();
  eval->add_option("--truth", eval_truth, "Dataset file with ground truth")->required();
  eval->add_option("--categories", eval_categories, "Category table file");
  eval->add_flag("--no-align", eval_no_align, "Skip rigid trajectory alignment in ATE");

  // --- sweep-sigma ---
  auto* sweep = app.add_subcommand("sweep-sigma",
                                   "Solve the protocol once per orientation sigma");
  std::string sweep_sigmas = "1e-1,1,10,100";
  sweep->add_option("--sigmas", sweep_sigmas, "Comma-separated sigma list");
  add_protocol_options(sweep, config);
  add_solver_options(sweep, config);
  sweep->add_option("--out", config.output_dir, "Output directory")->required();

  // --- report ---
  auto* report = app.add_subcommand("report", "Re-emit a trials.json as csv or json");
  std::string report_dir, report_format = "csv";
  report->add_option("--in", report_dir, "Directory containing trials.json")->required();
  report->add_option("--format", report_format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      config.base_seed = sim_seed;
      const qslam::DatasetConfig dc =
          qslam::trial_dataset_config(config, sim_trajectory_index, sim_seed_index);
      // The raw dataset is written; consumers canonicalize on load, so the
      // file and the in-memory pipeline see identical bytes.
      qslam::io::save_dataset(qslam::make_dataset(dc), sim_out);
      std::cout << "wrote " << sim_out << "\n";
      return kExitOk;
    }

    if (*solve) {
      const qslam::TrialsOutput output = qslam::run_trials(config);
      std::cout << output.csv();
      if (!output.all_succeeded()) {
        for (const auto& r : output.results) {
          if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
        }
        return kExitSolver;
      }
      return kExitOk;
    }

    if (*eval) {
      const qslam::io::Estimate estimate = qslam::io::load_estimate(eval_estimate);
      const qslam::SimulatedDataset dataset = qslam::io::load_dataset(eval_truth);
      const qslam::CategoryTable table = eval_categories.empty()
                                             ? qslam::CategoryTable::defaults()
                                             : qslam::CategoryTable::load(eval_categories);
      std::map<int, qslam::Box3D> gt_boxes;
      for (const auto& lm : dataset.landmarks_gt) gt_boxes.emplace(lm.id, lm.box);
      std::map<int, qslam::OrientationTarget> targets;
      for (const auto& track : dataset.tracks) {
        if (estimate.quadrics.count(track.id)) {
          targets[track.id] =
              qslam::orientation_target(qslam::aggregate_label(track).first, table);
        }
      }
      qslam::MetricReport m = qslam::evaluate(estimate.poses, estimate.quadrics,
                                              dataset.poses_gt, gt_boxes, targets);
      if (eval_no_align) m.ate_m = qslam::ate(estimate.poses, dataset.poses_gt, false);
      nlohmann::json j = {{"ate_m", m.ate_m},
                          {"landmark_position_m", m.landmark_position_m},
                          {"landmark_shape", m.landmark_shape},
                          {"landmark_quality", m.landmark_quality},
                          {"axis_deviation_rad", m.axis_deviation_rad},
                          {"landmarks_evaluated", m.landmarks_evaluated},
                          {"landmarks_dropped", m.landmarks_dropped}};
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }

    if (*sweep) {
      const std::vector<double> sigmas = parse_sigmas(sweep_sigmas);
      const qslam::SweepOutput output = qslam::sweep_sigma(config, sigmas);
      std::cout << output.csv();
      for (const auto& p : output.points) {
        if (!p.trials.all_succeeded()) return kExitSolver;
      }
      return kExitOk;
    }

    if (*report) {
      std::ifstream in(std::filesystem::path(report_dir) / "trials.json");
      if (!in) throw qslam::InconsistentDataset("no trials.json in " + report_dir);
      nlohmann::json j;
      in >> j;
      if (report_format == "json") {
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << qslam::trials_csv_from_json(j);
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
  return kExitConfig;
}
