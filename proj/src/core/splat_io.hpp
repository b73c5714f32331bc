// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace splatrig {

inline constexpr int kMaxShDegree = 3;
inline constexpr int kMaxShBases = 16;

constexpr int sh_bases_for_degree(int degree) { return (degree + 1) * (degree + 1); }

// One 3D Gaussian in exposed form: linear scales, opacity in [0,1], unit
// rotation quaternion. sh[b][c] is basis b of channel c; bases past the scene
// degree are zero.
struct Gaussian3D {
  Vec3 mean = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 scale = Vec3::Ones();
  double opacity = 1.0;
  std::array<std::array<double, 3>, kMaxShBases> sh{};
};

struct SplatScene {
  std::vector<Gaussian3D> gaussians;
  int sh_degree = 0;
  std::string source_label;
  // Emit the (ignored) nx ny nz properties on write. Set by the parser when the
  // input carried them so that trainer files round-trip byte-for-byte.
  bool write_normals = false;

  std::size_t size() const { return gaussians.size(); }
  bool empty() const { return gaussians.empty(); }
};

// Binary little-endian PLY as written by 3DGS-style trainers.
SplatScene parse_splat_ply(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_splat_ply(const SplatScene& scene);

SplatScene load_splat_ply(const std::string& path);
void save_splat_ply(const SplatScene& scene, const std::string& path);

}  // namespace splatrig
