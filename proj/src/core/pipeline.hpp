// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alignment.hpp"
#include "augment.hpp"
#include "image.hpp"
#include "kinematics.hpp"
#include "renderer.hpp"
#include "rigging.hpp"
#include "segmentation.hpp"
#include "trajectory.hpp"

namespace splatrig {

// Either a fixed similarity transform or an ICP registration against a
// reference cloud.
struct AlignmentSpec {
  std::string reference_points;         // path; empty when `fixed` is set
  std::optional<Aabb> crop;             // default: every Gaussian
  RigidTransform init;
  IcpParams icp;
  std::optional<SimilarityFit> fixed;
};

struct ObjectSpec {
  std::string name;
  std::string scene;  // path
  AlignmentSpec alignment;
};

struct KnnSpec {
  std::string points;  // path, "x y z label" lines
  int k = 5;
  Aabb region;
};

struct PipelineConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::string scene;
  std::string kinematics;
  std::string cameras;
  AlignmentSpec alignment;
  std::vector<double> capture_q;
  double capture_aperture = 0.0;
  std::vector<std::pair<std::string, Aabb>> link_boxes;  // link name -> box in link frame
  std::optional<KnnSpec> knn;
  std::vector<ObjectSpec> objects;
  RenderParams render;
  AugmentParams augment;
  LimitMode limits = LimitMode::kStrict;
  std::string output_dir = "out";
  unsigned jobs = 0;

  std::filesystem::path resolve(const std::string& path) const;
  std::filesystem::path output_path() const { return resolve(output_dir); }
};

// JSON configuration; see README for the schema.
PipelineConfig parse_pipeline_config(std::string_view json, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::string& path);

// Checks every parameter block and that every referenced file exists and
// parses. Returns a one-line summary.
std::string validate_config(const PipelineConfig& config);

// {"cameras": [{"id", "fx", "fy", "cx", "cy", "width", "height",
//   "world_to_cam": {"rotation": [w,x,y,z], "translation": [x,y,z]},
//   "near", "far"}]}, poses in the robot base frame.
std::vector<Camera> parse_cameras(std::string_view json);
std::vector<Camera> load_cameras(const std::string& path);

// Persisted registration results (alignment.json).
struct AlignmentRecord {
  AlignmentResult robot;
  std::vector<std::pair<std::string, AlignmentResult>> objects;
};

std::string serialize_alignment(const AlignmentRecord& record);
AlignmentRecord parse_alignment(std::string_view json);
void save_alignment(const AlignmentRecord& record, const std::string& path);
AlignmentRecord load_alignment(const std::string& path);

inline constexpr const char* kAlignmentFile = "alignment.json";
inline constexpr const char* kAssignmentFile = "assignment.bin";
inline constexpr const char* kManifestFile = "manifest.csv";

// Registers the scene and every object. Does not touch the output directory.
AlignmentRecord run_alignment(const PipelineConfig& config);

// AABB pass, refined by the KNN pass inside its region when configured.
LinkAssignment run_segmentation(const PipelineConfig& config, const KinematicModel& model,
                                const AlignmentRecord& alignment);

// Everything loaded and ready to render.
struct Workcell {
  PipelineConfig config;
  KinematicModel model;
  std::vector<Camera> cameras;
  AlignmentRecord alignment;
  SceneRig rig;

  const Camera& camera(std::string_view id) const;
  JointState capture_state() const;
};

SceneRig build_rig(const PipelineConfig& config, const KinematicModel& model, const AlignmentRecord& alignment,
                   const LinkAssignment& assignment);

// Loads alignment.json and assignment.bin from the output directory,
// computing and writing whichever is missing.
Workcell open_workcell(const PipelineConfig& config);

// Camera given in the robot frame, re-expressed in the rig's scene frame.
Camera scene_camera(const SceneRig& rig, const Camera& robot_camera);

// Poses the rig at `state` and renders it from `camera`. Errors are prefixed
// with the timestep.
Image render_state(const Workcell& cell, const TrajectoryState& state, const std::vector<std::string>& object_ids,
                   const Camera& camera, unsigned jobs = 1);

struct FramePlan {
  std::int64_t t = 0;
  std::string camera_id;
  std::string image_path;  // relative to the output directory
  Action action;
  std::size_t state_index = 0;
  std::size_t camera_index = 0;
};

std::string frame_filename(std::int64_t t, const std::string& camera_id);

// One entry per (state, camera), states in log order, cameras in file order.
std::vector<FramePlan> plan_frames(const TrajectoryLog& log, const std::vector<Camera>& cameras);

struct RenderOptions {
  unsigned jobs = 0;
  bool dry_run = false;
};

// Renders every planned frame into out_dir and writes manifest.csv. With
// dry_run nothing is written. Returns the plan.
std::vector<FramePlan> render_trajectory(const Workcell& cell, const TrajectoryLog& log,
                                         const std::filesystem::path& out_dir, const RenderOptions& options = {});

std::string manifest_header();
std::string manifest_row(const FramePlan& frame);

struct ManifestRow {
  std::int64_t t = 0;
  std::string camera_id;
  std::string image_path;
  Action action;
};
std::vector<ManifestRow> parse_manifest(std::string_view csv);
std::vector<ManifestRow> load_manifest(const std::string& path);

// Augments every frame listed in in_dir/manifest.csv into out_dir (same file
// names, augmentation index = manifest row) and copies the manifest. Returns
// the number of frames.
std::size_t augment_dataset(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                            const AugmentParams& params, unsigned jobs = 0);

}  // namespace splatrig
