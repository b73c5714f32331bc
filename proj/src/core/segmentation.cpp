// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "segmentation.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"

namespace splatrig {

namespace {

constexpr char kAssignmentMagic[4] = {'S', 'R', 'L', 'B'};
constexpr std::uint32_t kAssignmentVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t* pos) {
  if (bytes.size() - *pos < sizeof(T)) fail(ErrorCode::kFormat, "assignment file truncated");
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<std::make_unsigned_t<T>>(bytes[*pos + i]) << (8 * i);
  }
  *pos += sizeof(T);
  return static_cast<T>(u);
}

}  // namespace

void LinkAssignment::validate(std::size_t scene_size) const {
  if (labels.size() != scene_size) {
    fail(ErrorCode::kLengthMismatch, "assignment has " + std::to_string(labels.size()) +
                                         " labels for a scene of " + std::to_string(scene_size));
  }
  for (const Label& l : labels) {
    if (l.is_link() && (l.index() < 0 || l.index() >= link_count)) {
      fail(ErrorCode::kInvalidArgument, "link label " + std::to_string(l.index()) + " out of range");
    }
  }
}

std::vector<Vec3> robot_frame_means(const SplatScene& scene, const RigidTransform& align) {
  std::vector<Vec3> out;
  out.reserve(scene.size());
  for (const auto& g : scene.gaussians) out.push_back(align.apply(g.mean));
  return out;
}

LinkAssignment segment_by_aabb(const SplatScene& scene, const LinkBoxes& boxes, const FkResult& fk_home,
                               const RigidTransform& align) {
  const bool any = std::any_of(boxes.per_link.begin(), boxes.per_link.end(),
                               [](const auto& b) { return b.has_value(); });
  if (!any) fail(ErrorCode::kInvalidArgument, "segment_by_aabb needs at least one link box");
  if (fk_home.link_poses.size() < boxes.per_link.size()) {
    fail(ErrorCode::kLengthMismatch, "fewer FK link poses than link boxes");
  }
  std::vector<RigidTransform> to_local(boxes.per_link.size());
  for (std::size_t l = 0; l < boxes.per_link.size(); ++l) {
    if (!boxes.per_link[l]) continue;
    if (!boxes.per_link[l]->valid()) {
      fail(ErrorCode::kInvalidArgument, "box for link " + std::to_string(l) + " has min >= max");
    }
    to_local[l] = invert(fk_home.link_poses[l]);
  }

  LinkAssignment out;
  out.link_count = static_cast<int>(boxes.per_link.size());
  out.labels.assign(scene.size(), Label::background());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Vec3 p = align.apply(scene.gaussians[i].mean);
    for (std::size_t l = 0; l < boxes.per_link.size(); ++l) {
      if (boxes.per_link[l] && boxes.per_link[l]->contains(to_local[l].apply(p))) {
        out.labels[i] = Label::link(static_cast<int>(l));
        break;
      }
    }
  }
  return out;
}

KnnModel train_knn(std::span<const Vec3> points, std::span<const int> labels, int k) {
  if (k <= 0 || k % 2 == 0) {
    fail(ErrorCode::kInvalidArgument, "knn k must be positive and odd, got " + std::to_string(k));
  }
  if (points.size() != labels.size()) fail(ErrorCode::kLengthMismatch, "knn points and labels differ in length");
  if (points.size() < static_cast<std::size_t>(k)) {
    fail(ErrorCode::kInvalidArgument, "knn needs at least k=" + std::to_string(k) + " training points, got " +
                                          std::to_string(points.size()));
  }
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) fail(ErrorCode::kInvalidArgument, "knn needs at least two distinct labels");
  if (*distinct.begin() < 0) fail(ErrorCode::kInvalidArgument, "knn labels must be link indices >= 0");
  KnnModel model;
  model.points.assign(points.begin(), points.end());
  model.labels.assign(labels.begin(), labels.end());
  model.k = k;
  // Build the tree over points ordered by (label, original index) so that the
  // tree's index tie-break ranks equidistant points by label first.
  model.tree_order.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) model.tree_order[i] = i;
  std::stable_sort(model.tree_order.begin(), model.tree_order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  std::vector<Vec3> sorted;
  sorted.reserve(points.size());
  for (std::size_t i : model.tree_order) sorted.push_back(points[i]);
  model.tree = KdTree3(sorted);
  return model;
}

LinkAssignment classify_links(const KnnModel& model, const SplatScene& scene, const RigidTransform& align,
                              const Aabb& region, int link_count, unsigned jobs) {
  if (!region.valid()) fail(ErrorCode::kInvalidArgument, "knn region has min >= max");
  for (int l : model.labels) {
    if (l >= link_count) fail(ErrorCode::kInvalidArgument, "knn label " + std::to_string(l) + " exceeds link count");
  }
  const auto points = robot_frame_means(scene, align);
  LinkAssignment out;
  out.link_count = link_count;
  out.labels.assign(scene.size(), Label::background());
  std::vector<char> inside(scene.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) inside[i] = region.contains(points[i]);
  if (std::none_of(inside.begin(), inside.end(), [](char c) { return c != 0; })) {
    fail(ErrorCode::kInvalidArgument, "knn region selects no Gaussians");
  }
  parallel_for(
      scene.size(), jobs,
      [&](std::size_t i) {
        if (!inside[i]) return;
        const auto neighbors = model.tree.knn(points[i], static_cast<std::size_t>(model.k));
        std::map<int, int> votes;
        for (const auto& n : neighbors) ++votes[model.labels[model.tree_order[n.index]]];
        // std::map iterates labels ascending, so '>' keeps the lowest on ties.
        int best = -1;
        int best_votes = 0;
        for (const auto& [label, count] : votes) {
          if (count > best_votes) {
            best = label;
            best_votes = count;
          }
        }
        out.labels[i] = Label::link(best);
      },
      256);
  return out;
}

LinkAssignment merge_assignments(const LinkAssignment& base, const LinkAssignment& override_labels,
                                 const Aabb& region, std::span<const Vec3> robot_points) {
  if (base.labels.size() != override_labels.labels.size() || base.labels.size() != robot_points.size()) {
    fail(ErrorCode::kLengthMismatch, "merge_assignments inputs differ in length");
  }
  LinkAssignment out = base;
  out.link_count = std::max(base.link_count, override_labels.link_count);
  for (std::size_t i = 0; i < robot_points.size(); ++i) {
    if (region.contains(robot_points[i])) out.labels[i] = override_labels.labels[i];
  }
  return out;
}

LabeledPoints parse_labeled_points(std::istream& in, const KinematicModel* model) {
  LabeledPoints out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    Vec3 p;
    std::string label;
    if (!(ss >> p[0] >> p[1] >> p[2] >> label)) {
      fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": expected 'x y z label'");
    }
    int index = -1;
    if (model != nullptr) index = model->link_index(label);
    if (index < 0) {
      std::size_t used = 0;
      try {
        index = std::stoi(label, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != label.size() || index < 0) {
        fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": unknown label '" + label + "'");
      }
    }
    out.points.push_back(p);
    out.labels.push_back(index);
  }
  return out;
}

LabeledPoints load_labeled_points(const std::string& path, const KinematicModel* model) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return parse_labeled_points(in, model);
}

std::vector<std::uint8_t> serialize_assignment(const LinkAssignment& a) {
  std::vector<std::uint8_t> out(std::begin(kAssignmentMagic), std::end(kAssignmentMagic));
  put_le<std::uint32_t>(out, kAssignmentVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.link_count));
  put_le<std::uint64_t>(out, a.labels.size());
  for (const Label& l : a.labels) put_le<std::int32_t>(out, l.code());
  return out;
}

LinkAssignment deserialize_assignment(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kAssignmentMagic, 4) != 0) {
    fail(ErrorCode::kFormat, "not an assignment file");
  }
  std::size_t pos = 4;
  const auto version = get_le<std::uint32_t>(bytes, &pos);
  if (version != kAssignmentVersion) {
    fail(ErrorCode::kFormat, "unsupported assignment version " + std::to_string(version));
  }
  LinkAssignment a;
  a.link_count = static_cast<int>(get_le<std::uint32_t>(bytes, &pos));
  const auto count = get_le<std::uint64_t>(bytes, &pos);
  if ((bytes.size() - pos) / 4 != count || (bytes.size() - pos) % 4 != 0) {
    fail(ErrorCode::kFormat, "assignment file size does not match its label count");
  }
  a.labels.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const Label l = Label::from_code(get_le<std::int32_t>(bytes, &pos));
    if (l.is_link() && l.index() >= a.link_count) {
      fail(ErrorCode::kFormat, "assignment label " + std::to_string(l.index()) + " at Gaussian " + std::to_string(i) +
                                   " exceeds link count " + std::to_string(a.link_count));
    }
    a.labels.push_back(l);
  }
  return a;
}

void save_assignment(const LinkAssignment& a, const std::string& path) {
  const auto bytes = serialize_assignment(a);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

LinkAssignment load_assignment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_assignment(bytes);
}

}  // namespace splatrig
