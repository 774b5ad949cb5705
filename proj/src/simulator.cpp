#include "qslam/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace qslam {

namespace {

// E[||N(0, I3)||], used to scale Gaussian draws to a target expected norm.
constexpr double kChi3Mean = 1.5957691216057308;
constexpr double kDegree = M_PI / 180.0;

Eigen::Vector3d gaussian3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng), n(rng)};
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Camera-to-world pose with +z toward the target and +y roughly down.
Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d right = Eigen::Vector3d(0, 0, -1).cross(forward);
  if (right.norm() < 1e-6) right = Eigen::Vector3d::UnitX();
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d R;
  R.col(0) = right;
  R.col(1) = down;
  R.col(2) = forward;
  return Pose(R, eye);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string> default_vocabulary() {
  return {"bottle", "book",   "cup",          "keyboard",    "vase",
          "laptop", "potted plant", "sports ball", "chair", "remote"};
}

Scene generate_scene(std::uint64_t seed, int n_objects, const std::vector<std::string>& vocab) {
  if (n_objects < 1) throw Error("generate_scene: need at least one object");
  if (vocab.empty()) throw Error("generate_scene: empty vocabulary");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const CategoryTable table = CategoryTable::defaults();

  Scene scene;
  scene.objects.reserve(n_objects);
  for (int i = 0; i < n_objects; ++i) {
    const std::string& label = vocab[i % vocab.size()];
    const OrientationKind kind = table.lookup(label);

    // Clear major/minor separation keeps the major axis well-defined.
    const double major = 0.25 + 0.20 * u01(rng);
    const double minor_a = major * (0.45 + 0.30 * u01(rng));
    const double minor_b = major * (0.45 + 0.30 * u01(rng));

    Eigen::Matrix3d R;
    Eigen::Vector3d radii;
    const double yaw = 2.0 * M_PI * u01(rng);
    switch (kind) {
      case OrientationKind::kVertical:
        radii = Eigen::Vector3d(minor_a, minor_b, major);
        R = rotation_from_euler_zyx({0, 0, yaw});  // keeps the major axis on +z
        break;
      case OrientationKind::kHorizontal:
        radii = Eigen::Vector3d(major, minor_a, minor_b);
        R = rotation_from_euler_zyx({0, 0, yaw});  // major axis in the xy-plane
        break;
      default:
        radii = Eigen::Vector3d(major, minor_a, minor_b);
        R = random_rotation(rng);
        break;
    }

    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const Eigen::Vector3d center(-2.0 + 4.0 * u01(rng), -2.0 + 4.0 * u01(rng),
                                   0.3 + 1.2 * u01(rng));
      ConstrainedDualQuadric quadric(R, center, radii);
      const Box3D envelope = quadric_aabb(quadric);
      const bool overlaps = std::any_of(
          scene.objects.begin(), scene.objects.end(),
          [&](const SceneObject& other) { return envelope.intersects(other.envelope); });
      if (!overlaps) {
        scene.objects.push_back({std::move(quadric), envelope, label});
        placed = true;
      }
    }
    if (!placed) {
      throw PlacementFailure("generate_scene: could not place object " + std::to_string(i));
    }
  }
  return scene;
}

std::vector<Pose> generate_trajectory(TrajectoryPattern pattern, std::uint64_t seed,
                                      int n_poses) {
  if (n_poses < 2) throw Error("generate_trajectory: need at least two poses");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.02);

  const Eigen::Vector3d target(0.0, 0.0, 0.8);
  std::vector<Pose> poses;
  poses.reserve(n_poses);

  if (pattern == TrajectoryPattern::kOrbit) {
    const double radius = 4.0 + (u01(rng) - 0.5);
    const double height = 1.2 + 0.6 * (u01(rng) - 0.5);
    const double phase = 2.0 * M_PI * u01(rng);
    for (int k = 0; k < n_poses; ++k) {
      const double angle = phase + 2.0 * M_PI * k / n_poses;
      Eigen::Vector3d eye(radius * std::cos(angle), radius * std::sin(angle), height);
      eye += Eigen::Vector3d(jitter(rng), jitter(rng), jitter(rng));
      poses.push_back(look_at(eye, target));
    }
  } else {
    const double lateral = -3.5 + (u01(rng) - 0.5);
    const double height = 1.0 + 0.4 * (u01(rng) - 0.5);
    for (int k = 0; k < n_poses; ++k) {
      const double s = static_cast<double>(k) / (n_poses - 1);
      Eigen::Vector3d eye(-5.0 + 10.0 * s, lateral, height);
      eye += Eigen::Vector3d(jitter(rng), jitter(rng), jitter(rng));
      poses.push_back(look_at(eye, target));
    }
  }
  return poses;
}

std::vector<Pose> corrupt_odometry(const std::vector<Pose>& gt_poses, const NoiseConfig& noise) {
  if (gt_poses.size() < 2) throw Error("corrupt_odometry: need at least two poses");
  std::mt19937_64 rng(mix_seed(noise.seed, 1));

  std::vector<Pose> odometry;
  odometry.reserve(gt_poses.size() - 1);
  for (std::size_t i = 0; i + 1 < gt_poses.size(); ++i) {
    const Pose u = gt_poses[i].inverse() * gt_poses[i + 1];
    Eigen::Matrix3d R = u.rotation();
    Eigen::Vector3d t = u.translation();

    if (noise.rotation_fraction > 0) {
      const double step_angle = log_so3(u.rotation()).norm();
      const double mean_angle = noise.rotation_fraction * std::max(step_angle, kDegree);
      R = R * exp_so3((mean_angle / kChi3Mean) * gaussian3(rng));
    }
    if (noise.translation_fraction > 0) {
      const double step_length = u.translation().norm();
      t += (noise.translation_fraction * step_length / kChi3Mean) * gaussian3(rng);
    }
    odometry.emplace_back(R, t);
  }
  return odometry;
}

std::vector<DetectionTrack> render_detections(const Scene& scene,
                                              const std::vector<Pose>& gt_poses,
                                              const CameraIntrinsics& K,
                                              const NoiseConfig& noise,
                                              const std::vector<std::string>& vocab,
                                              double confusion_rate) {
  std::mt19937_64 rng(mix_seed(noise.seed, 2));
  std::normal_distribution<double> px(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  const BoundingBox2D frame(0, 0, K.width, K.height);
  std::vector<DetectionTrack> tracks(scene.objects.size());
  for (std::size_t j = 0; j < scene.objects.size(); ++j) {
    tracks[j].id = static_cast<int>(j);
    tracks[j].vocabulary = vocab;
  }

  for (std::size_t i = 0; i < gt_poses.size(); ++i) {
    for (std::size_t j = 0; j < scene.objects.size(); ++j) {
      const SceneObject& object = scene.objects[j];
      BoundingBox2D exact;
      try {
        exact = conic_bbox(project_quadric(gt_poses[i], K, object.quadric), K);
      } catch (const Error&) {
        continue;  // behind the camera or degenerate view
      }
      if (!exact.intersects(frame)) continue;

      BoundingBox2D box = exact.clipped(K.width, K.height);
      if (noise.box_sigma_px > 0) {
        Eigen::Vector4d v = box.vector();
        for (int k = 0; k < 4; ++k) v[k] += noise.box_sigma_px * px(rng);
        box = BoundingBox2D(std::min(v[0], v[2]), std::min(v[1], v[3]),
                            std::max(v[0], v[2]), std::max(v[1], v[3]));
      }

      int label_index = static_cast<int>(
          std::find(vocab.begin(), vocab.end(), object.label) - vocab.begin());
      if (label_index == static_cast<int>(vocab.size())) {
        throw Error("render_detections: scene label missing from vocabulary: " + object.label);
      }
      if (confusion_rate > 0 && vocab.size() > 1 && u01(rng) < confusion_rate) {
        const int offset = 1 + static_cast<int>(u01(rng) * (vocab.size() - 1));
        label_index = (label_index + offset) % static_cast<int>(vocab.size());
      }
      Eigen::VectorXd scores = Eigen::VectorXd::Zero(vocab.size());
      scores[label_index] = 1.0;

      tracks[j].detections.push_back({static_cast<int>(i), box, std::move(scores)});
    }
  }

  // Unobserved objects produce no track.
  std::vector<DetectionTrack> observed;
  observed.reserve(tracks.size());
  for (auto& track : tracks) {
    if (!track.detections.empty()) observed.push_back(std::move(track));
  }
  return observed;
}

SimulatedDataset make_dataset(const DatasetConfig& config) {
  const std::vector<std::string> vocab =
      config.vocabulary.empty() ? default_vocabulary() : config.vocabulary;

  SimulatedDataset dataset;
  dataset.intrinsics = config.intrinsics;

  const Scene scene = generate_scene(config.scene_seed, config.n_objects, vocab);
  dataset.poses_gt = generate_trajectory(config.pattern, config.trajectory_seed, config.n_poses);
  dataset.odometry = corrupt_odometry(dataset.poses_gt, config.noise);
  dataset.tracks = render_detections(scene, dataset.poses_gt, dataset.intrinsics, config.noise,
                                     vocab, config.confusion_rate);

  dataset.landmarks_gt.reserve(scene.objects.size());
  for (std::size_t j = 0; j < scene.objects.size(); ++j) {
    dataset.landmarks_gt.push_back({static_cast<int>(j), scene.objects[j].envelope,
                                    scene.objects[j].label, scene.objects[j].quadric});
  }
  return dataset;
}

}  // namespace qslam
