// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "geometry.hpp"
#include "image.hpp"
#include "splat_io.hpp"

namespace splatrig {

// Pinhole camera, +z forward, +x right, +y down. Pixel (i, j) samples the
// image plane at (i, j).
struct Camera {
  std::string id;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  RigidTransform world_to_cam;
  double near = 0.01;
  double far = 1000.0;

  void validate() const;
  Vec3 center() const;  // camera position in world coordinates
};

struct Splat2D {
  Eigen::Vector2d mean2d = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov2d = Eigen::Matrix2d::Identity();
  double depth = 0.0;
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
};

struct RenderParams {
  int tile_size = 16;
  double alpha_min = 1.0 / 255.0;
  double transmittance_min = 1e-4;
  Vec3 background = Vec3::Zero();
  unsigned jobs = 0;  // 0 = hardware concurrency

  void validate() const;
};

inline constexpr double kCovarianceDilation = 0.3;
inline constexpr double kAlphaCap = 0.99;
inline constexpr double kEigenFloor = 1e-8;

// Real spherical-harmonics color: 0.5 + sum_b c_b Y_b(dir), clamped to [0,1].
// coeffs[b][channel]; needs (degree + 1)^2 entries.
Vec3 eval_sh(std::span<const std::array<double, 3>> coeffs, const Vec3& dir, int degree);

// EWA projection. Returns nullopt when the camera-space depth is outside
// [near, far].
std::optional<Splat2D> project_gaussian(const Gaussian3D& g, const Camera& cam, int sh_degree);

// Tile-binned front-to-back compositing.
Image rasterize(const SplatScene& scene, const Camera& cam, const RenderParams& params = {});

// Brute force: every pixel walks every depth-sorted splat. Test oracle.
Image rasterize_reference(const SplatScene& scene, const Camera& cam, const RenderParams& params = {});

// Transmittance after each splat that contributed to pixel (x, y), in
// compositing order. Debugging and tests.
std::vector<double> transmittance_trace(const SplatScene& scene, const Camera& cam, const RenderParams& params,
                                        int x, int y);

}  // namespace splatrig
