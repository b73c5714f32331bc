// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "splat_io.hpp"

namespace splatrig {

struct IcpParams {
  int max_iterations = 100;
  double convergence_tol = 1e-6;          // meters, on the rms delta
  double max_correspondence_dist = 0.05;  // meters
  bool estimate_scale = false;
  double trim_fraction = 0.1;  // worst correspondences dropped per iteration, [0, 0.5)
  unsigned jobs = 1;

  void validate() const;
};

// Maps source points into the target frame as x -> scale * R x + t, where
// (R, t) is `transform`.
struct AlignmentResult {
  RigidTransform transform;
  double scale = 1.0;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  // rms over the kept correspondences at the start of each iteration.
  std::vector<double> residual_history;
};

struct SimilarityFit {
  RigidTransform transform;
  double scale = 1.0;
};

// Closed-form least-squares fit of paired points (Umeyama). Reflections are
// corrected so det(R) = +1. Fewer than three pairs or a collinear
// configuration raise kDegenerateGeometry.
SimilarityFit best_fit_transform(std::span<const Vec3> source, std::span<const Vec3> target,
                                 bool estimate_scale);

// Trimmed point-to-point ICP with a hard correspondence gate.
AlignmentResult icp_align(std::span<const Vec3> source, std::span<const Vec3> target,
                          const RigidTransform& init, const IcpParams& params);

// Registers the splat means inside `crop` (splat frame) against robot surface
// points (robot frame). The result maps splat frame into robot frame.
AlignmentResult align_scene_to_robot(const SplatScene& scene, std::span<const Vec3> robot_reference,
                                     const Aabb& crop, const RigidTransform& init,
                                     const IcpParams& params);

// Multiplies means and linear scales by s.
SplatScene rescale_scene(const SplatScene& scene, double s);

// Whitespace separated "x y z" per line; '#' starts a comment.
std::vector<Vec3> parse_points_xyz(std::istream& in);
std::vector<Vec3> load_points_xyz(const std::string& path);

}  // namespace splatrig
