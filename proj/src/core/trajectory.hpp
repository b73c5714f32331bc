// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "rigging.hpp"

namespace splatrig {

// End-effector action a_t: position and orientation in the robot frame.
struct Action {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

struct TrajectoryState {
  std::int64_t t = 0;
  std::vector<double> q;
  double aperture = 0.0;
  std::vector<ObjectPose> object_poses;  // aligned with TrajectoryLog::object_ids
  Action action;
};

struct TrajectoryLog {
  std::vector<TrajectoryState> states;
  std::vector<std::string> object_ids;
  std::vector<std::string> metadata;  // '#' comment lines, verbatim
};

// One record per line:
//   t=<int> q=<f,...> grip=<f> [obj:<name>=<px,py,pz,qw,qx,qy,qz> ...] act=<px,py,pz,qw,qx,qy,qz>
// Quaternions within 1e-3 of unit norm are renormalized; others are errors.
TrajectoryLog parse_trajectory(std::istream& in);
TrajectoryLog load_trajectory(const std::string& path);

// Inverse of parse_trajectory for a single state, shortest round-trip numbers.
std::string format_trajectory_record(const TrajectoryState& state, const std::vector<std::string>& object_ids);

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace splatrig
