#include "qslam/semantics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qslam {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view to_string(OrientationKind kind) {
  switch (kind) {
    case OrientationKind::kHorizontal:
      return "horizontal";
    case OrientationKind::kVertical:
      return "vertical";
    default:
      return "unassigned";
  }
}

OrientationKind orientation_kind_from_string(std::string_view s) {
  const std::string lower = to_lower(s);
  if (lower == "horizontal") return OrientationKind::kHorizontal;
  if (lower == "vertical") return OrientationKind::kVertical;
  if (lower == "unassigned") return OrientationKind::kUnassigned;
  throw Error("unknown orientation kind: " + std::string(s));
}

CategoryTable CategoryTable::defaults() {
  CategoryTable t;
  for (const char* label : {"fork", "knife", "spoon", "sofa", "cell phone", "tv monitor",
                            "mouse", "remote", "keyboard", "book", "scissors", "laptop"}) {
    t.assign(label, OrientationKind::kHorizontal);
  }
  for (const char* label : {"person", "backpack", "bottle", "wine glass", "cup", "vase",
                            "potted plant", "teddy bear", "chair"}) {
    t.assign(label, OrientationKind::kVertical);
  }
  t.assign("sports ball", OrientationKind::kUnassigned);
  return t;
}

CategoryTable CategoryTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("CategoryTable: cannot open " + path.string());
  CategoryTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("CategoryTable: missing tab separator at " + path.string() + ":" +
                  std::to_string(lineno));
    }
    t.assign(line.substr(0, tab), orientation_kind_from_string(line.substr(tab + 1)));
  }
  return t;
}

void CategoryTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("CategoryTable: cannot write " + path.string());
  for (const auto& [label, kind] : table_) {
    out << label << '\t' << to_string(kind) << '\n';
  }
}

void CategoryTable::assign(std::string_view label, OrientationKind kind) {
  table_[to_lower(label)] = kind;
}

OrientationKind CategoryTable::lookup(std::string_view label) const {
  const auto it = table_.find(to_lower(label));
  return it == table_.end() ? OrientationKind::kUnassigned : it->second;
}

OrientationTarget orientation_target(std::string_view label, const CategoryTable& table) {
  return OrientationTarget{table.lookup(label)};
}

std::pair<std::string, Eigen::VectorXd> aggregate_label(const DetectionTrack& track) {
  if (track.detections.empty()) throw EmptyTrack("aggregate_label: track has no detections");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(track.vocabulary.size());
  for (const auto& det : track.detections) {
    if (det.scores.size() != mean.size()) {
      throw Error("aggregate_label: score vector does not match vocabulary size");
    }
    mean += det.scores;
  }
  mean /= static_cast<double>(track.detections.size());

  // Argmax with ties broken by lexicographically smallest label.
  int best = 0;
  for (int i = 1; i < mean.size(); ++i) {
    if (mean[i] > mean[best] ||
        (mean[i] == mean[best] && track.vocabulary[i] < track.vocabulary[best])) {
      best = i;
    }
  }
  return {track.vocabulary[best], mean};
}

namespace {
double population_stddev(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / n);
}
}  // namespace

bool reject_high_variance(const DetectionTrack& track, double threshold_px) {
  if (track.detections.empty()) throw EmptyTrack("reject_high_variance: track has no detections");
  std::vector<double> widths, heights;
  widths.reserve(track.detections.size());
  heights.reserve(track.detections.size());
  for (const auto& det : track.detections) {
    widths.push_back(det.box.width());
    heights.push_back(det.box.height());
  }
  return population_stddev(widths) >= threshold_px || population_stddev(heights) >= threshold_px;
}

}  // namespace qslam
