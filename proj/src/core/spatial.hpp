// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "geometry.hpp"

namespace splatrig {

// Static exact k-d tree over 3D points. Neighbors are ordered by squared
// distance, then by point index, so results do not depend on build order.
class KdTree3 {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double dist2 = 0.0;
  };

  KdTree3() = default;
  explicit KdTree3(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  // Requires size() > 0.
  Neighbor nearest(const Vec3& query) const;
  // Up to k neighbors, closest first.
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  int build(std::uint32_t begin, std::uint32_t end);
  void search(int node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace splatrig
