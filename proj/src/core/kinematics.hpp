// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "geometry.hpp"

namespace splatrig {

enum class JointType { kRevolute, kPrismatic, kFixed };

struct Joint {
  std::string name;
  JointType type = JointType::kFixed;
  int parent = -1;  // link index
  int child = -1;   // link index
  RigidTransform origin;
  Vec3 axis = Vec3::UnitX();
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

// One finger joint driven by the gripper aperture a in [0,1]:
//   f = offset + multiplier * a,  value = (1 - f) * lower + f * upper.
struct MimicEntry {
  std::string group;
  int joint = -1;
  double multiplier = 1.0;
  double offset = 0.0;
};

// Fixed-base kinematic tree. Joints are stored parent-before-child.
struct KinematicModel {
  std::vector<std::string> links;
  std::vector<Joint> joints;
  std::vector<MimicEntry> mimics;
  // Joints driven by JointState::values, in declaration order: every revolute
  // or prismatic joint that is not a mimic joint.
  std::vector<int> actuated;
  int root = 0;

  int link_index(std::string_view name) const;  // -1 if absent
  int joint_index(std::string_view name) const;  // -1 if absent
  std::size_t dof() const { return actuated.size(); }
};

enum class LimitMode { kStrict, kClamp };

struct JointState {
  std::vector<double> values;  // radians (revolute) or meters (prismatic)
  double aperture = 0.0;       // gripper opening in [0,1], drives mimic joints
};

// Per-link poses in the robot base frame, indexed like KinematicModel::links.
struct FkResult {
  std::vector<RigidTransform> link_poses;
};

// Line-oriented model description:
//   link NAME
//   joint NAME revolute|prismatic|fixed PARENT CHILD [xyz=x,y,z] [rpy=r,p,y]
//         [axis=x,y,z] [limits=lo,hi]
//   mimic GROUP JOINT [multiplier=m] [offset=o]
// rpy is extrinsic roll-pitch-yaw (R = Rz(yaw) Ry(pitch) Rx(roll)). '#'
// starts a comment.
KinematicModel parse_kinematic_model(std::string_view text);
KinematicModel load_kinematic_model(const std::string& path);

Mat3 rpy_to_rotation(double roll, double pitch, double yaw);

// child = parent o origin o motion(q).
FkResult forward_kinematics(const KinematicModel& model, const JointState& q,
                            LimitMode mode = LimitMode::kStrict);

// FK with every actuated joint at zero and the fingers at `aperture`.
FkResult gripper_fk(const KinematicModel& model, double aperture);

// Finger joint values for an aperture, in model.mimics order.
std::vector<double> mimic_joint_values(const KinematicModel& model, double aperture);

}  // namespace splatrig
