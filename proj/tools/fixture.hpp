// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace splatrig::fixture {

struct WorkcellOptions {
  int states = 20;          // trajectory length
  int image_size = 128;     // square frames
  std::uint64_t seed = 7;   // scene and trajectory sampling
  int gaussians_per_link = 160;
  int table_gaussians = 900;
};

// Maps the fixture's splat frame into its robot frame.
RigidTransform splat_to_robot_truth();

// scene.ply starts with gaussians_per_link Gaussians for each of these links
// in this order, followed by the table.
std::vector<std::string> scene_link_order();

// Writes a small synthetic workcell: a 6-joint arm with a parallel gripper,
// a table, one cube, two cameras, a pipeline config and trajectory logs.
//
//   config.json  scene.ply  cube.ply  robot.kin  robot_reference.xyz
//   knn_points.txt  cameras.json  trajectory.log  capture.log
void write_workcell(const std::filesystem::path& dir, const WorkcellOptions& options = {});

}  // namespace splatrig::fixture
