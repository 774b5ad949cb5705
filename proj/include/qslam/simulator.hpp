#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qslam/geometry.hpp"
#include "qslam/semantics.hpp"

namespace qslam {

struct SceneObject {
  ConstrainedDualQuadric quadric;
  Box3D envelope;  // axis-aligned ground-truth box of the quadric
  std::string label;
};

struct Scene {
  std::vector<SceneObject> objects;
};

struct NoiseConfig {
  double translation_fraction = 0.05;  // expected relative error per step
  double rotation_fraction = 0.15;
  double box_sigma_px = 4.0;  // per box coordinate
  std::uint64_t seed = 0;
};

struct LandmarkTruth {
  int id = 0;
  Box3D box;
  std::string label;
  ConstrainedDualQuadric quadric;
};

struct SimulatedDataset {
  CameraIntrinsics intrinsics;
  std::vector<Pose> poses_gt;
  std::vector<Pose> odometry;  // one relative measurement per consecutive pair
  std::vector<DetectionTrack> tracks;
  std::vector<LandmarkTruth> landmarks_gt;
};

// Deterministic per seed. Objects are placed in a desk-scale region around
// the origin without overlapping envelopes; vertical classes get their major
// semi-axis along +z, horizontal classes along a random direction in the
// xy-plane, unassigned classes a random orientation. Labels cycle through
// the vocabulary. Throws PlacementFailure when rejection sampling runs out
// of attempts.
Scene generate_scene(std::uint64_t seed, int n_objects, const std::vector<std::string>& vocab);

enum class TrajectoryPattern { kOrbit, kCorridor };

// Camera poses (camera-to-world, +z optical axis, +y pointing down) along a
// procedurally generated path looking at the object region. Waypoints carry
// a small seeded jitter so repeated trajectory indices differ.
std::vector<Pose> generate_trajectory(TrajectoryPattern pattern, std::uint64_t seed,
                                      int n_poses);

// Noisy relative motions. Per step, the true relative rotation is composed
// with a random rotation whose expected angle is rotation_fraction times the
// step's rotation magnitude (floored at one degree before scaling), and the
// true relative translation gets additive Gaussian noise with expected norm
// translation_fraction times the step length.
std::vector<Pose> corrupt_odometry(const std::vector<Pose>& gt_poses, const NoiseConfig& noise);

// Per pose and visible object: exact tangent box, clipped to the image,
// then each coordinate perturbed by N(0, box_sigma_px^2). Objects behind the
// camera or with no overlap with the frame are omitted. The score vector
// puts mass 1 on the true label, or on a random wrong label with probability
// confusion_rate.
std::vector<DetectionTrack> render_detections(const Scene& scene,
                                              const std::vector<Pose>& gt_poses,
                                              const CameraIntrinsics& K,
                                              const NoiseConfig& noise,
                                              const std::vector<std::string>& vocab,
                                              double confusion_rate = 0.0);

struct DatasetConfig {
  int n_objects = 8;
  int n_poses = 40;
  TrajectoryPattern pattern = TrajectoryPattern::kOrbit;
  std::uint64_t scene_seed = 0;
  std::uint64_t trajectory_seed = 0;
  NoiseConfig noise;
  CameraIntrinsics intrinsics;
  double confusion_rate = 0.0;
  std::vector<std::string> vocabulary;  // empty selects the default set
};

std::vector<std::string> default_vocabulary();

// Full dataset for one trial: scene, trajectory, noisy odometry, tracks and
// ground truth. Deterministic per config.
SimulatedDataset make_dataset(const DatasetConfig& config);

// Splitmix64; used to derive independent stream seeds from (base, indices).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace qslam
