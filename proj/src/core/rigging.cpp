// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "rigging.hpp"

#include <algorithm>

#include "error.hpp"
#include "parallel.hpp"

namespace splatrig {

namespace {

bool bitwise_equal(const RigidTransform& a, const RigidTransform& b) {
  return a.quaternion().coeffs() == b.quaternion().coeffs() && a.translation() == b.translation();
}

bool is_exact_identity(const RigidTransform& t) {
  return bitwise_equal(t, RigidTransform::identity());
}

}  // namespace

void SceneRig::validate() const {
  assignment.validate(static_scene.size());
  for (const Label& l : assignment.labels) {
    if (l.is_link() && static_cast<std::size_t>(l.index()) >= capture_fk.link_poses.size()) {
      fail(ErrorCode::kInvalidArgument, "capture pose does not cover link " + std::to_string(l.index()));
    }
  }
}

RigidTransform link_transform(const SceneRig& rig, int link, const FkResult& fk) {
  if (link < 0 || static_cast<std::size_t>(link) >= rig.capture_fk.link_poses.size() ||
      static_cast<std::size_t>(link) >= fk.link_poses.size()) {
    fail(ErrorCode::kNotFound, "unknown link " + std::to_string(link));
  }
  const RigidTransform& now = fk.link_poses[link];
  const RigidTransform& captured = rig.capture_fk.link_poses[link];
  // The conjugation is the identity exactly when the link has not moved.
  if (bitwise_equal(now, captured)) return RigidTransform::identity();
  const RigidTransform relative = compose(now, invert(captured));
  return compose(invert(rig.splat_to_robot), compose(relative, rig.splat_to_robot));
}

RigidTransform object_transform(const SceneRig& rig, int object, const ObjectPose& pose) {
  if (object < 0 || static_cast<std::size_t>(object) >= rig.objects.size()) {
    fail(ErrorCode::kNotFound, "unknown object " + std::to_string(object));
  }
  return compose(invert(rig.splat_to_robot), compose(pose.transform(), rig.objects[object].align));
}

SplatScene pose_scene(const SceneRig& rig, const KinematicModel& model, const JointState& q,
                      std::span<const ObjectPose> object_poses, LimitMode mode, unsigned jobs) {
  if (object_poses.size() != rig.objects.size()) {
    fail(ErrorCode::kLengthMismatch, "got " + std::to_string(object_poses.size()) + " object poses for " +
                                         std::to_string(rig.objects.size()) + " rig objects");
  }
  if (rig.assignment.labels.size() != rig.static_scene.size()) {
    fail(ErrorCode::kLengthMismatch, "rig assignment does not match its scene");
  }
  const FkResult fk = forward_kinematics(model, q, mode);
  const std::size_t links = std::min(fk.link_poses.size(), rig.capture_fk.link_poses.size());
  std::vector<RigidTransform> per_link(links);
  std::vector<char> moves(links, 0);
  for (std::size_t l = 0; l < links; ++l) {
    per_link[l] = link_transform(rig, static_cast<int>(l), fk);
    moves[l] = !is_exact_identity(per_link[l]);
  }

  std::size_t total = rig.static_scene.size();
  for (const auto& obj : rig.objects) total += obj.scene.size();

  SplatScene out;
  // Lower-degree bases are zero-padded, so the output takes the highest degree.
  out.sh_degree = rig.static_scene.sh_degree;
  for (const auto& obj : rig.objects) out.sh_degree = std::max(out.sh_degree, obj.scene.sh_degree);
  out.write_normals = rig.static_scene.write_normals;
  out.source_label = rig.static_scene.source_label;
  out.gaussians.resize(total);

  const auto& labels = rig.assignment.labels;
  parallel_for(
      rig.static_scene.size(), jobs,
      [&](std::size_t i) {
        const Gaussian3D& g = rig.static_scene.gaussians[i];
        const Label l = labels[i];
        if (l.is_link()) {
          if (static_cast<std::size_t>(l.index()) >= links) {
            fail(ErrorCode::kNotFound, "Gaussian " + std::to_string(i) + " labeled with unknown link " +
                                           std::to_string(l.index()));
          }
          if (moves[l.index()]) {
            out.gaussians[i] = transform_gaussian(g, per_link[l.index()]);
            return;
          }
        }
        out.gaussians[i] = g;
      },
      4096);

  std::size_t offset = rig.static_scene.size();
  for (std::size_t k = 0; k < rig.objects.size(); ++k) {
    const auto& obj = rig.objects[k];
    const RigidTransform t = object_transform(rig, static_cast<int>(k), object_poses[k]);
    const bool identity = is_exact_identity(t);
    for (std::size_t i = 0; i < obj.scene.size(); ++i) {
      out.gaussians[offset + i] = identity ? obj.scene.gaussians[i] : transform_gaussian(obj.scene.gaussians[i], t);
    }
    offset += obj.scene.size();
  }
  return out;
}

}  // namespace splatrig
