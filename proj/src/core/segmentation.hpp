// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "kinematics.hpp"
#include "spatial.hpp"
#include "splat_io.hpp"

namespace splatrig {

// Rigid body a Gaussian belongs to.
class Label {
 public:
  enum class Kind : std::uint8_t { kStatic, kLink, kObject };

  constexpr Label() = default;
  static constexpr Label background() { return {}; }
  static constexpr Label link(int l) { return Label(Kind::kLink, l); }
  static constexpr Label object(int k) { return Label(Kind::kObject, k); }

  constexpr Kind kind() const { return kind_; }
  constexpr int index() const { return index_; }
  constexpr bool is_static() const { return kind_ == Kind::kStatic; }
  constexpr bool is_link() const { return kind_ == Kind::kLink; }
  constexpr bool is_object() const { return kind_ == Kind::kObject; }

  // On-disk code: -1 static, l for link l, -(k + 2) for object k.
  constexpr std::int32_t code() const {
    switch (kind_) {
      case Kind::kLink: return index_;
      case Kind::kObject: return -(index_ + 2);
      case Kind::kStatic: break;
    }
    return -1;
  }
  static constexpr Label from_code(std::int32_t c) {
    if (c >= 0) return link(c);
    if (c == -1) return background();
    return object(-c - 2);
  }

  friend constexpr bool operator==(Label, Label) = default;

 private:
  constexpr Label(Kind kind, int index) : kind_(kind), index_(index) {}
  Kind kind_ = Kind::kStatic;
  int index_ = 0;
};

struct LinkAssignment {
  std::vector<Label> labels;  // index-aligned with the scene
  int link_count = 0;

  void validate(std::size_t scene_size) const;
};

// Lazy k-nearest-neighbour classifier over labeled robot-frame points.
struct KnnModel {
  std::vector<Vec3> points;
  std::vector<int> labels;  // link indices
  int k = 5;
  KdTree3 tree;                         // over points in tree_order
  std::vector<std::size_t> tree_order;  // tree index -> training index
};

// Link boxes live in each link's local frame; links without a box are never
// assigned by this pass.
struct LinkBoxes {
  std::vector<std::optional<Aabb>> per_link;
};

// Robot-frame means: T_align applied to every Gaussian mean.
std::vector<Vec3> robot_frame_means(const SplatScene& scene, const RigidTransform& align);

// A Gaussian is link l iff fk_home(l)^-1 (T_align mean) lies in box l. The
// lowest link index wins where boxes overlap.
LinkAssignment segment_by_aabb(const SplatScene& scene, const LinkBoxes& boxes, const FkResult& fk_home,
                               const RigidTransform& align);

KnnModel train_knn(std::span<const Vec3> points, std::span<const int> labels, int k);

// Labels every Gaussian whose robot-frame mean falls in `region` by majority
// vote of its k nearest training points. Neighbors are ranked by (distance,
// label, training index); vote ties go to the lowest label. Gaussians outside the
// region stay static.
LinkAssignment classify_links(const KnnModel& model, const SplatScene& scene, const RigidTransform& align,
                              const Aabb& region, int link_count, unsigned jobs = 1);

// Takes override labels where robot_points[i] is inside region, base labels
// elsewhere.
LinkAssignment merge_assignments(const LinkAssignment& base, const LinkAssignment& override_labels,
                                 const Aabb& region, std::span<const Vec3> robot_points);

// "x y z label" per line; label is an integer link index or a link name
// resolved against `model` when given.
struct LabeledPoints {
  std::vector<Vec3> points;
  std::vector<int> labels;
};
LabeledPoints parse_labeled_points(std::istream& in, const KinematicModel* model);
LabeledPoints load_labeled_points(const std::string& path, const KinematicModel* model);

// assignment.bin: "SRLB", u32 version (1), u32 link_count, u64 count, then
// count little-endian i32 label codes.
std::vector<std::uint8_t> serialize_assignment(const LinkAssignment& a);
LinkAssignment deserialize_assignment(std::span<const std::uint8_t> bytes);
void save_assignment(const LinkAssignment& a, const std::string& path);
LinkAssignment load_assignment(const std::string& path);

}  // namespace splatrig
