#include "qslam/dataset_io.hpp"

#include <Eigen/Geometry>
#include <fstream>

namespace qslam::io {

using nlohmann::json;

nlohmann::json pose_to_json(const Pose& pose) {
  Eigen::Quaterniond q(pose.rotation());
  // Canonical sign: first nonzero of (w, x, y, z) positive.
  const double comps[4] = {q.w(), q.x(), q.y(), q.z()};
  for (double c : comps) {
    if (c != 0.0) {
      if (c < 0.0) q.coeffs() = -q.coeffs();
      break;
    }
  }
  const Eigen::Vector3d& t = pose.translation();
  return json::array({t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()});
}

Pose pose_from_json(const json& j) {
  if (!j.is_array() || j.size() != 7) {
    throw InconsistentDataset("pose record must be [tx, ty, tz, qw, qx, qy, qz]");
  }
  Eigen::Quaterniond q(j[3].get<double>(), j[4].get<double>(), j[5].get<double>(),
                       j[6].get<double>());
  q.normalize();
  return Pose(q.toRotationMatrix(),
              Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>()));
}

namespace {

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InconsistentDataset("expected 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json quadric_to_json(const ConstrainedDualQuadric& q) {
  const Vector9d v = q.to_vector();
  json out = json::array();
  for (int i = 0; i < 9; ++i) out.push_back(v[i]);
  return out;
}

ConstrainedDualQuadric quadric_from_json(const json& j) {
  if (!j.is_array() || j.size() != 9) throw InconsistentDataset("quadric must be a 9-vector");
  Vector9d v;
  for (int i = 0; i < 9; ++i) v[i] = j[i].get<double>();
  return ConstrainedDualQuadric::from_vector(v);
}

}  // namespace

json dataset_to_json(const SimulatedDataset& dataset) {
  json j;
  j["format"] = kDatasetFormatVersion;
  j["intrinsics"] = {{"fx", dataset.intrinsics.fx}, {"fy", dataset.intrinsics.fy},
                     {"cx", dataset.intrinsics.cx}, {"cy", dataset.intrinsics.cy},
                     {"width", dataset.intrinsics.width},
                     {"height", dataset.intrinsics.height}};
  j["poses_gt"] = json::array();
  for (const Pose& p : dataset.poses_gt) j["poses_gt"].push_back(pose_to_json(p));
  j["odometry"] = json::array();
  for (const Pose& u : dataset.odometry) j["odometry"].push_back(pose_to_json(u));

  j["tracks"] = json::array();
  for (const auto& track : dataset.tracks) {
    json t;
    t["id"] = track.id;
    t["vocabulary"] = track.vocabulary;
    t["detections"] = json::array();
    for (const auto& det : track.detections) {
      json d;
      d["pose_index"] = det.pose_index;
      d["box"] = json::array({det.box.xmin, det.box.ymin, det.box.xmax, det.box.ymax});
      d["scores"] = std::vector<double>(det.scores.data(), det.scores.data() + det.scores.size());
      t["detections"].push_back(std::move(d));
    }
    j["tracks"].push_back(std::move(t));
  }

  j["landmarks_gt"] = json::array();
  for (const auto& lm : dataset.landmarks_gt) {
    json l;
    l["id"] = lm.id;
    l["center"] = vec3_to_json(lm.box.center);
    l["half_extents"] = vec3_to_json(lm.box.half_extents);
    l["label"] = lm.label;
    l["quadric"] = quadric_to_json(lm.quadric);
    j["landmarks_gt"].push_back(std::move(l));
  }
  return j;
}

SimulatedDataset dataset_from_json(const json& j) {
  try {
    if (j.at("format").get<int>() != kDatasetFormatVersion) {
      throw InconsistentDataset("unsupported dataset format version");
    }
    SimulatedDataset dataset;
    const json& K = j.at("intrinsics");
    dataset.intrinsics = {K.at("fx").get<double>(), K.at("fy").get<double>(),
                          K.at("cx").get<double>(), K.at("cy").get<double>(),
                          K.at("width").get<int>(),  K.at("height").get<int>()};
    if (!dataset.intrinsics.is_valid()) throw InconsistentDataset("invalid intrinsics");

    for (const json& p : j.at("poses_gt")) dataset.poses_gt.push_back(pose_from_json(p));
    for (const json& u : j.at("odometry")) dataset.odometry.push_back(pose_from_json(u));

    for (const json& t : j.at("tracks")) {
      DetectionTrack track;
      track.id = t.at("id").get<int>();
      track.vocabulary = t.at("vocabulary").get<std::vector<std::string>>();
      for (const json& d : t.at("detections")) {
        const json& box = d.at("box");
        if (!box.is_array() || box.size() != 4) throw InconsistentDataset("bad box record");
        TrackDetection det;
        det.pose_index = d.at("pose_index").get<int>();
        det.box = BoundingBox2D(box[0].get<double>(), box[1].get<double>(),
                                box[2].get<double>(), box[3].get<double>());
        const auto scores = d.at("scores").get<std::vector<double>>();
        det.scores = Eigen::Map<const Eigen::VectorXd>(scores.data(), scores.size());
        track.detections.push_back(std::move(det));
      }
      dataset.tracks.push_back(std::move(track));
    }

    for (const json& l : j.at("landmarks_gt")) {
      LandmarkTruth lm;
      lm.id = l.at("id").get<int>();
      lm.box = Box3D(vec3_from_json(l.at("center")), vec3_from_json(l.at("half_extents")));
      lm.label = l.at("label").get<std::string>();
      lm.quadric = quadric_from_json(l.at("quadric"));
      dataset.landmarks_gt.push_back(std::move(lm));
    }
    return dataset;
  } catch (const json::exception& e) {
    throw InconsistentDataset(std::string("malformed dataset: ") + e.what());
  }
}

void save_dataset(const SimulatedDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << dataset_to_json(dataset).dump(2) << '\n';
}

SimulatedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InconsistentDataset("cannot open dataset " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InconsistentDataset(std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  return dataset_from_json(j);
}

SimulatedDataset canonicalized(const SimulatedDataset& dataset) {
  return dataset_from_json(dataset_to_json(dataset));
}

/* ************************************************************************* */
json estimate_to_json(const Estimate& estimate) {
  json j;
  j["format"] = kDatasetFormatVersion;
  j["config_hash"] = estimate.config_hash;
  j["poses"] = json::array();
  for (const Pose& p : estimate.poses) j["poses"].push_back(pose_to_json(p));
  j["landmarks"] = json::array();
  for (const auto& [id, q] : estimate.quadrics) {
    j["landmarks"].push_back({{"id", id}, {"quadric", quadric_to_json(q)}});
  }
  j["stats"] = {{"iterations", estimate.stats.iterations},
                {"accepted_steps", estimate.stats.accepted_steps},
                {"rejected_steps", estimate.stats.rejected_steps},
                {"initial_error", estimate.stats.initial_error},
                {"final_error", estimate.stats.final_error},
                {"termination", estimate.stats.termination}};
  return j;
}

Estimate estimate_from_json(const json& j) {
  try {
    Estimate estimate;
    estimate.config_hash = j.value("config_hash", "");
    for (const json& p : j.at("poses")) estimate.poses.push_back(pose_from_json(p));
    for (const json& l : j.at("landmarks")) {
      estimate.quadrics.emplace(l.at("id").get<int>(), quadric_from_json(l.at("quadric")));
    }
    if (j.contains("stats")) {
      const json& s = j["stats"];
      estimate.stats.iterations = s.value("iterations", 0);
      estimate.stats.accepted_steps = s.value("accepted_steps", 0);
      estimate.stats.rejected_steps = s.value("rejected_steps", 0);
      estimate.stats.initial_error = s.value("initial_error", 0.0);
      estimate.stats.final_error = s.value("final_error", 0.0);
      estimate.stats.termination = s.value("termination", "");
    }
    return estimate;
  } catch (const json::exception& e) {
    throw InconsistentDataset(std::string("malformed estimate: ") + e.what());
  }
}

void save_estimate(const Estimate& estimate, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << estimate_to_json(estimate).dump(2) << '\n';
}

Estimate load_estimate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InconsistentDataset("cannot open estimate " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InconsistentDataset(std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  return estimate_from_json(j);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace qslam::io
