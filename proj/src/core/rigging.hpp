// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "kinematics.hpp"
#include "segmentation.hpp"
#include "splat_io.hpp"

namespace splatrig {

// Object pose in the robot frame, relative to the object's spawn pose
// (origin, no rotation).
struct ObjectPose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  RigidTransform transform() const { return {orientation, position}; }
};

struct RigObject {
  std::string name;
  SplatScene scene;       // object splat, in its own splat frame
  RigidTransform align;   // object splat frame -> object simulator frame
};

// Everything needed to pose a captured scene. The static scene is already
// rescaled to metric units; splat_to_robot maps its frame to the robot base
// frame.
struct SceneRig {
  SplatScene static_scene;
  LinkAssignment assignment;
  RigidTransform splat_to_robot;
  FkResult capture_fk;  // link poses at the pose the scan was captured in
  std::vector<RigObject> objects;

  void validate() const;
};

// T^-1 o (fk[l] o capture_fk[l]^-1) o T with T = splat_to_robot: moves link
// l's Gaussians from the capture pose to the pose given by fk.
RigidTransform link_transform(const SceneRig& rig, int link, const FkResult& fk);

// T^-1 o pose o align_k: places object k's Gaussians in the scene frame.
RigidTransform object_transform(const SceneRig& rig, int object, const ObjectPose& pose);

// Static Gaussians unchanged, link Gaussians moved by their link transform,
// then every object's Gaussians appended in rig order.
SplatScene pose_scene(const SceneRig& rig, const KinematicModel& model, const JointState& q,
                      std::span<const ObjectPose> object_poses, LimitMode mode = LimitMode::kStrict,
                      unsigned jobs = 1);

}  // namespace splatrig
