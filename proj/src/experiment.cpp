#include "qslam/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace qslam {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string num2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("QUADRIC_ORIENT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return std::min(n, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

}  // namespace

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["trajectories"] = config.trajectories;
  j["seeds"] = config.seeds;
  j["objects"] = config.objects;
  j["poses"] = config.poses;
  j["trajectories_per_scene"] = config.trajectories_per_scene;
  j["base_seed"] = config.base_seed;
  j["noise"] = {{"translation_fraction", config.noise.translation_fraction},
                {"rotation_fraction", config.noise.rotation_fraction},
                {"box_sigma_px", config.noise.box_sigma_px}};
  j["confusion_rate"] = config.confusion_rate;
  j["intrinsics"] = {{"fx", config.intrinsics.fx}, {"fy", config.intrinsics.fy},
                     {"cx", config.intrinsics.cx}, {"cy", config.intrinsics.cy},
                     {"width", config.intrinsics.width}, {"height", config.intrinsics.height}};
  j["graph"] = {{"odometry_translation_fraction", config.graph.odometry_translation_fraction},
                {"odometry_rotation_fraction", config.graph.odometry_rotation_fraction},
                {"box_sigma_px", config.graph.box_sigma_px},
                {"orientation_sigma", config.graph.orientation_sigma},
                {"orientation_factors", config.graph.orientation_factors},
                {"variance_threshold_px", config.graph.variance_threshold_px},
                {"prior_sigma", config.graph.prior_sigma}};
  j["solver"] = {{"max_iterations", config.solver.max_iterations},
                 {"initial_lambda", config.solver.initial_lambda},
                 {"lambda_factor", config.solver.lambda_factor},
                 {"relative_decrease_tol", config.solver.relative_decrease_tol},
                 {"jacobian_step", config.solver.jacobian_step},
                 {"gradient_tol", config.solver.gradient_tol}};
  j["paired"] = config.paired;
  j["dataset_paths"] = config.dataset_paths;
  j["category_table_path"] = config.category_table_path;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  return io::fnv1a_hex(config_to_json(config).dump());
}

DatasetConfig trial_dataset_config(const ExperimentConfig& config, int trajectory, int seed) {
  DatasetConfig dc;
  dc.n_objects = config.objects;
  dc.n_poses = config.poses;
  dc.pattern = trajectory % 2 == 0 ? TrajectoryPattern::kOrbit : TrajectoryPattern::kCorridor;
  const int scene =
      config.trajectories_per_scene > 0 ? trajectory / config.trajectories_per_scene : trajectory;
  dc.scene_seed = mix_seed(config.base_seed, 101, static_cast<std::uint64_t>(scene));
  dc.trajectory_seed = mix_seed(config.base_seed, 202, static_cast<std::uint64_t>(trajectory));
  dc.noise = config.noise;
  dc.noise.seed = mix_seed(config.base_seed, 303,
                           static_cast<std::uint64_t>(trajectory) * 1000003ULL +
                               static_cast<std::uint64_t>(seed));
  dc.intrinsics = config.intrinsics;
  dc.confusion_rate = config.confusion_rate;
  return dc;
}

/* ************************************************************************* */
namespace {

struct Task {
  int trajectory = 0;
  int seed = 0;
  bool orientation = false;
  std::string dataset_path;  // empty: simulate
};

TrialResult run_one(const ExperimentConfig& config, const CategoryTable& table,
                    const std::string& hash, const Task& task) {
  TrialResult result;
  result.trajectory = task.trajectory;
  result.seed = task.seed;
  result.orientation_factors = task.orientation;
  try {
    const DatasetConfig dc = trial_dataset_config(config, task.trajectory, task.seed);
    const SimulatedDataset dataset = task.dataset_path.empty()
                                         ? io::canonicalized(make_dataset(dc))
                                         : io::load_dataset(task.dataset_path);

    GraphConfig graph_config = config.graph;
    graph_config.orientation_factors = task.orientation;
    Problem problem = build_problem(dataset, table, graph_config);
    auto [values, stats] = optimize(problem.graph, problem.initial, config.solver);

    std::map<int, Box3D> gt_boxes;
    for (const auto& lm : dataset.landmarks_gt) gt_boxes.emplace(lm.id, lm.box);
    // Evaluation targets come from the semantics regardless of whether the
    // orientation factors were enabled, so off/on runs share the metric.
    std::map<int, OrientationTarget> targets;
    for (const auto& track : dataset.tracks) {
      if (values.quadrics.count(track.id)) {
        targets[track.id] = orientation_target(aggregate_label(track).first, table);
      }
    }

    result.metrics =
        evaluate(values.poses, values.quadrics, dataset.poses_gt, gt_boxes, targets);
    result.metrics.seed = dc.noise.seed;
    result.metrics.config_hash = hash;
    result.stats = stats;
    result.estimate = {values.poses, values.quadrics, stats, hash};
    result.rejected_tracks = problem.rejected_tracks;
    result.uninitialized = problem.uninitialized;
  } catch (const std::exception& e) {
    result.error = "trial trajectory=" + std::to_string(task.trajectory) +
                   " seed=" + std::to_string(task.seed) + ": " + e.what();
  }
  return result;
}

TrialAggregate aggregate_results(const std::vector<TrialResult>& results, bool orientation) {
  TrialAggregate agg;
  agg.orientation_factors = orientation;
  std::vector<const MetricReport*> reports;
  for (const auto& r : results) {
    if (r.orientation_factors == orientation && r.error.empty()) reports.push_back(&r.metrics);
  }
  agg.trials = static_cast<int>(reports.size());
  if (reports.empty()) return agg;

  const auto stats = [&](auto field, double& mean, double& stddev) {
    double sum = 0;
    for (const auto* m : reports) sum += m->*field;
    mean = sum / reports.size();
    double var = 0;
    for (const auto* m : reports) var += (m->*field - mean) * (m->*field - mean);
    stddev = std::sqrt(var / reports.size());
  };
  stats(&MetricReport::ate_m, agg.ate_m, agg.ate_m_std);
  stats(&MetricReport::landmark_position_m, agg.landmark_position_m,
        agg.landmark_position_m_std);
  stats(&MetricReport::landmark_shape, agg.landmark_shape, agg.landmark_shape_std);
  stats(&MetricReport::landmark_quality, agg.landmark_quality, agg.landmark_quality_std);
  stats(&MetricReport::axis_deviation_rad, agg.axis_deviation_rad,
        agg.axis_deviation_rad_std);
  return agg;
}

}  // namespace

bool TrialsOutput::all_succeeded() const {
  for (const auto& r : results) {
    if (!r.error.empty()) return false;
  }
  return true;
}

json TrialsOutput::to_json() const {
  json j;
  j["config_hash"] = hash;
  j["trials"] = json::array();
  for (const auto& r : results) {
    json t;
    t["trajectory"] = r.trajectory;
    t["seed"] = r.seed;
    t["orientation_factors"] = r.orientation_factors;
    t["error"] = r.error;
    t["metrics"] = {{"ate_m", r.metrics.ate_m},
                    {"landmark_position_m", r.metrics.landmark_position_m},
                    {"landmark_shape", r.metrics.landmark_shape},
                    {"landmark_quality", r.metrics.landmark_quality},
                    {"axis_deviation_rad", r.metrics.axis_deviation_rad},
                    {"landmarks_evaluated", r.metrics.landmarks_evaluated},
                    {"landmarks_dropped", r.metrics.landmarks_dropped},
                    {"seed", r.metrics.seed}};
    json per = json::array();
    for (const auto& lm : r.metrics.per_landmark) {
      per.push_back({{"id", lm.id},
                     {"position_m", lm.position_m},
                     {"shape", lm.shape},
                     {"quality", lm.quality},
                     {"axis_deviation_rad", lm.axis_deviation_rad},
                     {"has_axis_target", lm.has_axis_target}});
    }
    t["metrics"]["per_landmark"] = std::move(per);
    t["stats"] = {{"iterations", r.stats.iterations},
                  {"accepted_steps", r.stats.accepted_steps},
                  {"rejected_steps", r.stats.rejected_steps},
                  {"initial_error", r.stats.initial_error},
                  {"final_error", r.stats.final_error},
                  {"termination", r.stats.termination}};
    t["rejected_tracks"] = r.rejected_tracks;
    t["uninitialized"] = r.uninitialized;
    j["trials"].push_back(std::move(t));
  }
  j["aggregates"] = json::array();
  for (const auto& a : aggregates) {
    // Standard deviations are an extension beyond the mean-only reporting.
    j["aggregates"].push_back({{"orientation_factors", a.orientation_factors},
                               {"trials", a.trials},
                               {"ate_m", a.ate_m},
                               {"landmark_position_m", a.landmark_position_m},
                               {"landmark_shape", a.landmark_shape},
                               {"landmark_quality", a.landmark_quality},
                               {"axis_deviation_rad", a.axis_deviation_rad},
                               {"ate_m_std", a.ate_m_std},
                               {"landmark_position_m_std", a.landmark_position_m_std},
                               {"landmark_shape_std", a.landmark_shape_std},
                               {"landmark_quality_std", a.landmark_quality_std},
                               {"axis_deviation_rad_std", a.axis_deviation_rad_std}});
  }
  return j;
}

std::string trials_csv_from_json(const json& j) {
  std::ostringstream out;
  out << "# config " << j.value("config_hash", "") << "\n";
  out << "trial,trajectory,seed,orientation_factors,ate_m,landmark_position_m,"
         "landmark_shape,landmark_quality,axis_deviation_rad,landmarks_evaluated,"
         "landmarks_dropped,iterations,initial_error,final_error,termination,error\n";
  int index = 0;
  for (const auto& t : j.at("trials")) {
    const auto& m = t.at("metrics");
    const auto& s = t.at("stats");
    out << index++ << ',' << t.at("trajectory").get<int>() << ',' << t.at("seed").get<int>()
        << ',' << (t.at("orientation_factors").get<bool>() ? 1 : 0) << ','
        << num(m.at("ate_m").get<double>()) << ','
        << num(m.at("landmark_position_m").get<double>()) << ','
        << num(m.at("landmark_shape").get<double>()) << ','
        << num(m.at("landmark_quality").get<double>()) << ','
        << num(m.at("axis_deviation_rad").get<double>()) << ','
        << m.at("landmarks_evaluated").get<int>() << ','
        << m.at("landmarks_dropped").get<int>() << ',' << s.at("iterations").get<int>() << ','
        << num(s.at("initial_error").get<double>()) << ','
        << num(s.at("final_error").get<double>()) << ',' << s.at("termination").get<std::string>()
        << ',' << (t.at("error").get<std::string>().empty() ? "" : "failed") << "\n";
  }
  for (const auto& a : j.at("aggregates")) {
    out << "aggregate,-,-," << (a.at("orientation_factors").get<bool>() ? 1 : 0) << ','
        << num(a.at("ate_m").get<double>()) << ','
        << num(a.at("landmark_position_m").get<double>()) << ','
        << num(a.at("landmark_shape").get<double>()) << ','
        << num(a.at("landmark_quality").get<double>()) << ','
        << num(a.at("axis_deviation_rad").get<double>()) << ",-,-,-,-,-,-,"
        << a.at("trials").get<int>() << " trials\n";
  }
  return out.str();
}

std::string TrialsOutput::csv() const { return trials_csv_from_json(to_json()); }

/* ************************************************************************* */
TrialsOutput run_trials(const ExperimentConfig& config) {
  const CategoryTable table = config.category_table_path.empty()
                                  ? CategoryTable::defaults()
                                  : CategoryTable::load(config.category_table_path);

  std::vector<bool> toggles;
  if (config.paired) {
    toggles = {false, true};
  } else {
    toggles = {config.graph.orientation_factors};
  }

  std::vector<Task> tasks;
  if (!config.dataset_paths.empty()) {
    for (std::size_t i = 0; i < config.dataset_paths.size(); ++i) {
      for (bool on : toggles) {
        tasks.push_back({static_cast<int>(i), 0, on, config.dataset_paths[i]});
      }
    }
  } else {
    if (config.trajectories < 1 || config.seeds < 1) {
      throw Error("run_trials: trajectories and seeds must be positive");
    }
    for (int t = 0; t < config.trajectories; ++t) {
      for (int s = 0; s < config.seeds; ++s) {
        for (bool on : toggles) tasks.push_back({t, s, on, ""});
      }
    }
  }

  TrialsOutput output;
  output.hash = config_hash(config);
  output.results.resize(tasks.size());

  const int n_threads = std::min<int>(resolve_threads(config.threads),
                                      static_cast<int>(tasks.size()));
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      output.results[i] = run_one(config, table, output.hash, tasks[i]);
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (bool on : toggles) output.aggregates.push_back(aggregate_results(output.results, on));

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    {
      std::ofstream csv(dir / "trials.csv");
      if (!csv) throw Error("cannot write " + (dir / "trials.csv").string());
      csv << output.csv();
    }
    {
      std::ofstream js(dir / "trials.json");
      if (!js) throw Error("cannot write " + (dir / "trials.json").string());
      js << output.to_json().dump(2) << '\n';
    }
    for (const auto& r : output.results) {
      if (!r.error.empty()) continue;
      const std::string name = "trial_" + std::to_string(r.trajectory) + "_" +
                               std::to_string(r.seed) + "_" +
                               (r.orientation_factors ? "on" : "off") + ".json";
      io::save_estimate(r.estimate, dir / name);
    }
  }
  return output;
}

/* ************************************************************************* */
SweepOutput sweep_sigma(const ExperimentConfig& config, const std::vector<double>& sigmas) {
  if (sigmas.empty()) throw Error("sweep_sigma: sigma list is empty");

  SweepOutput output;
  for (double sigma : sigmas) {
    ExperimentConfig point_config = config;
    point_config.graph.orientation_factors = true;
    point_config.graph.orientation_sigma = sigma;
    point_config.paired = false;
    point_config.output_dir.clear();  // sweep emits only its own files

    SweepPoint point;
    point.sigma = sigma;
    point.trials = run_trials(point_config);
    for (const auto& agg : point.trials.aggregates) {
      if (agg.orientation_factors) point.mean_ate_m = agg.ate_m;
    }
    output.points.push_back(std::move(point));
  }
  output.hash = config_hash(config);

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "sweep.csv");
    csv << output.csv();
    std::ofstream svg(dir / "sweep.svg");
    svg << output.svg();
  }
  return output;
}

std::string SweepOutput::csv() const {
  std::ostringstream out;
  out << "# config " << hash << "\n";
  out << "sigma,mean_ate_m\n";
  for (const auto& p : points) out << num(p.sigma) << ',' << num(p.mean_ate_m) << "\n";
  return out.str();
}

std::string SweepOutput::svg() const {
  constexpr double width = 640, height = 420;
  constexpr double left = 80, right = 610, top = 30, bottom = 370;

  double xmin = std::log10(points.front().sigma), xmax = xmin;
  double ymax = 0;
  for (const auto& p : points) {
    xmin = std::min(xmin, std::log10(p.sigma));
    xmax = std::max(xmax, std::log10(p.sigma));
    ymax = std::max(ymax, p.mean_ate_m);
  }
  if (xmax == xmin) {
    xmin -= 1;
    xmax += 1;
  }
  if (ymax <= 0) ymax = 1;
  ymax *= 1.15;

  const auto X = [&](double sigma) {
    return left + (std::log10(sigma) - xmin) / (xmax - xmin) * (right - left);
  };
  const auto Y = [&](double ate) { return bottom - ate / ymax * (bottom - top); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<!-- config " << hash << " -->\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";

  // x ticks at each swept sigma, y axis with 5 ticks
  for (const auto& p : points) {
    const double x = X(p.sigma);
    out << "<line x1=\"" << num2(x) << "\" y1=\"" << bottom << "\" x2=\"" << num2(x)
        << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num2(x) << "\" y=\"" << bottom + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << num(p.sigma) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = ymax * i / 5.0;
    const double y = Y(v);
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << num2(y) << "\" x2=\"" << left
        << "\" y2=\"" << num2(y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 9 << "\" y=\"" << num2(y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << num2(v) << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 40
      << "\" font-size=\"13\" text-anchor=\"middle\">orientation factor sigma (log scale)"
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (top + bottom) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (top + bottom) / 2 << ")\">mean ATE [m]</text>\n";

  out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
  for (const auto& p : points) out << num2(X(p.sigma)) << ',' << num2(Y(p.mean_ate_m)) << ' ';
  out << "\"/>\n";
  for (const auto& p : points) {
    out << "<circle cx=\"" << num2(X(p.sigma)) << "\" cy=\"" << num2(Y(p.mean_ate_m))
        << "\" r=\"3.5\" fill=\"#1f6fb2\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace qslam
