// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace splatrig {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

struct Gaussian3D;

// Closed axis-aligned box.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  // min < max on every axis.
  bool valid() const { return (min.array() < max.array()).all(); }
};

// Symmetric positive semi-definite 3x3 matrix.
struct Covariance3 {
  Mat3 matrix = Mat3::Identity();
};

// Proper rigid motion x -> R x + t. Rotation is held as a unit quaternion;
// matrices are produced on demand.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Quat& rotation, const Vec3& translation);
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation_only(const Vec3& t) { return {Quat::Identity(), t}; }

  const Quat& quaternion() const { return rotation_; }
  Mat3 rotation() const { return rotation_.toRotationMatrix(); }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }
  Mat4 matrix() const;

 private:
  Quat rotation_ = Quat::Identity();
  Vec3 translation_ = Vec3::Zero();
};

// Rotation matrix of a unit quaternion (w,x,y,z). Throws kInvalidArgument if
// |q| deviates from 1 by more than 1e-6.
Mat3 quat_to_rotation(const Quat& q);

// Sigma = R diag(S)^2 R^T. Throws on non-positive scales.
Covariance3 build_covariance(const Vec3& scale, const Quat& q);

// mean' = R mean + t, Sigma' = R Sigma R^T. The covariance update is carried
// by composing the stored quaternion; scales, opacity and color are kept.
Gaussian3D transform_gaussian(const Gaussian3D& g, const RigidTransform& t);

// (a o b)(x) = a(b(x)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

}  // namespace splatrig
