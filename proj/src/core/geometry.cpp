// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "geometry.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "splat_io.hpp"

namespace splatrig {

RigidTransform::RigidTransform(const Quat& rotation, const Vec3& translation)
    : rotation_(rotation.normalized()), translation_(translation) {}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(Quat(rotation).normalized()), translation_(translation) {}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Mat3 quat_to_rotation(const Quat& q) {
  const double n = q.norm();
  if (!(std::abs(n - 1.0) <= 1e-6)) {
    fail(ErrorCode::kInvalidArgument, "quaternion is not unit (norm " + std::to_string(n) + ")");
  }
  // Renormalize so the result is orthonormal to double precision.
  return q.normalized().toRotationMatrix();
}

Covariance3 build_covariance(const Vec3& scale, const Quat& q) {
  if (!(scale.minCoeff() > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "covariance scales must be positive");
  }
  const Mat3 r = quat_to_rotation(q);
  const Vec3 s2 = scale.cwiseProduct(scale);
  Covariance3 c;
  c.matrix = r * s2.asDiagonal() * r.transpose();
  // Exact symmetry; the product above can differ in the last bit.
  c.matrix = 0.5 * (c.matrix + c.matrix.transpose()).eval();
  return c;
}

Gaussian3D transform_gaussian(const Gaussian3D& g, const RigidTransform& t) {
  Gaussian3D out = g;
  out.mean = t.apply(g.mean);
  out.rotation = (t.quaternion() * g.rotation).normalized();
  return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.quaternion() * b.quaternion(), a.quaternion() * b.translation() + a.translation()};
}

RigidTransform invert(const RigidTransform& t) {
  const Quat inv = t.quaternion().conjugate();
  return {inv, -(inv * t.translation())};
}

}  // namespace splatrig
