// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "renderer.hpp"
#include "test_support.hpp"

namespace splatrig {
namespace {

using testing::Rng;
using testing::thrown_code;

constexpr double kPi = std::numbers::pi;
constexpr double kDc = 0.28209479177387814;

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Real spherical harmonic of degree l, order m with the Condon-Shortley phase,
// built from the associated Legendre functions (which omit that phase).
double real_sh(int l, int m, const Vec3& d) {
  const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
  const double phi = std::atan2(d.y(), d.x());
  const int am = std::abs(m);
  const double k = std::sqrt((2 * l + 1) / (4 * kPi) * factorial(l - am) / factorial(l + am));
  const double p = std::assoc_legendre(l, am, std::cos(theta)) * (am % 2 == 1 ? -1.0 : 1.0);
  if (m == 0) return k * p;
  if (m > 0) return std::sqrt(2.0) * k * std::cos(m * phi) * p;
  return std::sqrt(2.0) * k * std::sin(am * phi) * p;
}

Vec3 oracle_sh(const std::array<std::array<double, 3>, kMaxShBases>& coeffs, const Vec3& d, int degree) {
  Vec3 rgb = Vec3::Constant(0.5);
  for (int l = 0; l <= degree; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int b = l * l + l + m;
      for (int c = 0; c < 3; ++c) rgb[c] += real_sh(l, m, d) * coeffs[b][c];
    }
  }
  return rgb.cwiseMax(0.0).cwiseMin(1.0);
}

Camera axis_camera(int w, int h, double f) {
  Camera c;
  c.id = "axis";
  c.fx = c.fy = f;
  c.cx = 0.5 * (w - 1);
  c.cy = 0.5 * (h - 1);
  c.width = w;
  c.height = h;
  return c;
}

Gaussian3D colored(const Vec3& mean, double scale, double opacity, const Vec3& rgb) {
  Gaussian3D g;
  g.mean = mean;
  g.scale = Vec3::Constant(scale);
  g.opacity = opacity;
  for (int c = 0; c < 3; ++c) g.sh[0][c] = (rgb[c] - 0.5) / kDc;
  return g;
}

TEST(EvalSh, MatchesLegendreOracle) {
  Rng rng(41);
  for (int trial = 0; trial < 400; ++trial) {
    const int degree = trial % 4;
    std::array<std::array<double, 3>, kMaxShBases> coeffs{};
    for (auto& b : coeffs) {
      for (auto& c : b) c = testing::uniform(rng, -0.3, 0.3);
    }
    const Vec3 d = testing::random_unit(rng);
    const Vec3 got = eval_sh(coeffs, d, degree);
    EXPECT_LT((got - oracle_sh(coeffs, d, degree)).cwiseAbs().maxCoeff(), 1e-12) << degree;
  }
}

TEST(EvalSh, DegreeZeroIsViewIndependent) {
  std::array<std::array<double, 3>, kMaxShBases> coeffs{};
  coeffs[0] = {1.0, -1.0, 0.0};
  const Vec3 a = eval_sh(coeffs, Vec3::UnitX(), 0);
  const Vec3 b = eval_sh(coeffs, Vec3(0, -0.6, 0.8), 0);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a.x(), 0.5 + kDc, 1e-15);
  EXPECT_NEAR(a.y(), 0.5 - kDc, 1e-15);
  EXPECT_EQ(a.z(), 0.5);
}

TEST(EvalSh, ClampsAndValidates) {
  std::array<std::array<double, 3>, kMaxShBases> coeffs{};
  coeffs[0] = {10.0, -10.0, 0.0};
  EXPECT_EQ(eval_sh(coeffs, Vec3::UnitZ(), 0), Vec3(1.0, 0.0, 0.5));
  EXPECT_EQ(thrown_code([&] { eval_sh(coeffs, Vec3::UnitZ(), 4); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(thrown_code([&] { eval_sh(coeffs, Vec3(0, 0, 2), 1); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(thrown_code([&] { eval_sh(std::span(coeffs.data(), 3), Vec3::UnitZ(), 1); }),
            ErrorCode::kInvalidArgument);
}

TEST(ProjectGaussian, OnAxisIsotropicClosedForm) {
  const Camera cam = axis_camera(64, 64, 100.0);
  const Gaussian3D g = colored(Vec3(0, 0, 5), 0.1, 0.7, Vec3(0.2, 0.4, 0.6));
  const auto s = project_gaussian(g, cam, 0);
  ASSERT_TRUE(s.has_value());
  EXPECT_DOUBLE_EQ(s->depth, 5.0);
  EXPECT_NEAR(s->mean2d.x(), 31.5, 1e-12);
  EXPECT_NEAR(s->mean2d.y(), 31.5, 1e-12);
  const double v = std::pow(100.0 * 0.1 / 5.0, 2) + kCovarianceDilation;
  EXPECT_NEAR(s->cov2d(0, 0), v, 1e-12);
  EXPECT_NEAR(s->cov2d(1, 1), v, 1e-12);
  EXPECT_NEAR(s->cov2d(0, 1), 0.0, 1e-12);
  EXPECT_LT((s->color - Vec3(0.2, 0.4, 0.6)).norm(), 1e-12);
  EXPECT_EQ(s->opacity, 0.7);
}

TEST(ProjectGaussian, CovarianceMatchesNumericJacobian) {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Camera cam = testing::random_camera(rng, 80, 60, 3.0);
    const Gaussian3D g = testing::random_gaussian(rng, 0, 0.5);
    const auto s = project_gaussian(g, cam, 0);
    ASSERT_TRUE(s.has_value());
    auto project = [&](const Vec3& world) {
      const Vec3 c = cam.world_to_cam.apply(world);
      return Eigen::Vector2d(cam.fx * c.x() / c.z() + cam.cx, cam.fy * c.y() / c.z() + cam.cy);
    };
    Eigen::Matrix<double, 2, 3> j;
    const double h = 1e-6;
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      j.col(a) = (project(g.mean + e) - project(g.mean - e)) / (2 * h);
    }
    const Mat3 sigma = build_covariance(g.scale, g.rotation).matrix;
    const Eigen::Matrix2d expected = j * sigma * j.transpose() + kCovarianceDilation * Eigen::Matrix2d::Identity();
    EXPECT_LT((s->cov2d - expected).cwiseAbs().maxCoeff(), 1e-4 * (1.0 + expected.cwiseAbs().maxCoeff()));
    EXPECT_LT((s->mean2d - project(g.mean)).norm(), 1e-9);
  }
}

TEST(ProjectGaussian, CullsOutsideDepthRange) {
  Camera cam = axis_camera(32, 32, 30.0);
  cam.far = 10.0;
  EXPECT_FALSE(project_gaussian(colored(Vec3(0, 0, -1), 0.1, 0.5, Vec3::Ones()), cam, 0));
  EXPECT_FALSE(project_gaussian(colored(Vec3(0, 0, 0.001), 0.1, 0.5, Vec3::Ones()), cam, 0));
  EXPECT_FALSE(project_gaussian(colored(Vec3(0, 0, 11), 0.1, 0.5, Vec3::Ones()), cam, 0));
  EXPECT_TRUE(project_gaussian(colored(Vec3(0, 0, 9), 0.1, 0.5, Vec3::Ones()), cam, 0));
}

TEST(Rasterize, SingleSplatCenterPixelClosedForm) {
  Camera cam = axis_camera(33, 33, 40.0);
  SplatScene scene;
  scene.gaussians.push_back(colored(Vec3(0, 0, 4), 0.2, 0.5, Vec3(1, 0, 0)));
  RenderParams params;
  params.background = Vec3(0, 0, 1);
  const Image img = rasterize(scene, cam, params);
  EXPECT_EQ(img.at(16, 16, 0), 128);
  EXPECT_EQ(img.at(16, 16, 1), 0);
  EXPECT_EQ(img.at(16, 16, 2), 128);
  EXPECT_EQ(img.at(0, 0, 0), 0);
  EXPECT_EQ(img.at(0, 0, 2), 255);
}

TEST(Rasterize, EmptyAndCulledScenesShowBackground) {
  const Camera cam = axis_camera(20, 10, 20.0);
  RenderParams params;
  params.background = Vec3(0.2, 0.4, 1.0);
  SplatScene scene;
  Image img = rasterize(scene, cam, params);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 20; ++x) {
      EXPECT_EQ(img.at(x, y, 0), 51);
      EXPECT_EQ(img.at(x, y, 1), 102);
      EXPECT_EQ(img.at(x, y, 2), 255);
    }
  }
  scene.gaussians.push_back(colored(Vec3(0, 0, -3), 0.5, 0.9, Vec3(1, 1, 1)));
  scene.gaussians.push_back(colored(Vec3(50, 0, 3), 0.1, 0.9, Vec3(1, 1, 1)));
  EXPECT_EQ(rasterize(scene, cam, params), img);
}

TEST(Rasterize, DepthOrderNotSceneOrder) {
  const Camera cam = axis_camera(24, 24, 30.0);
  const Gaussian3D near = colored(Vec3(0, 0, 3), 0.3, 0.95, Vec3(1, 0, 0));
  const Gaussian3D far = colored(Vec3(0, 0, 6), 0.6, 0.95, Vec3(0, 1, 0));
  SplatScene a;
  a.gaussians = {near, far};
  SplatScene b;
  b.gaussians = {far, near};
  const Image ia = rasterize(a, cam);
  EXPECT_EQ(ia, rasterize(b, cam));
  EXPECT_GT(ia.at(11, 11, 0), 200);
  EXPECT_LT(ia.at(11, 11, 1), 20);
}

TEST(Rasterize, TiledMatchesReferenceExactly) {
  Rng rng(43);
  for (int trial = 0; trial < 12; ++trial) {
    const SplatScene scene = testing::random_scene(rng, 150, trial % 4, 0.8);
    const Camera cam = testing::random_camera(rng, 48 + trial, 40, 3.0);
    RenderParams params;
    params.background = testing::random_vec3(rng, 0, 1);
    const Image reference = rasterize_reference(scene, cam, params);
    for (int tile : {1, 7, 16, 64}) {
      params.tile_size = tile;
      EXPECT_EQ(rasterize(scene, cam, params), reference) << trial << " tile " << tile;
    }
  }
}

TEST(Rasterize, ResultIndependentOfJobs) {
  Rng rng(44);
  const SplatScene scene = testing::random_scene(rng, 2000, 3, 1.0);
  const Camera cam = testing::random_camera(rng, 96, 72, 3.0);
  RenderParams one;
  one.jobs = 1;
  RenderParams many;
  many.jobs = 5;
  EXPECT_EQ(rasterize(scene, cam, one), rasterize(scene, cam, many));
}

TEST(TransmittanceTrace, MonotoneAndBounded) {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const SplatScene scene = testing::random_scene(rng, 300, 1, 0.6);
    const Camera cam = testing::random_camera(rng, 32, 32, 2.5);
    RenderParams params;
    const auto trace = transmittance_trace(scene, cam, params, 16, 16);
    double previous = 1.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      EXPECT_LE(trace[i], previous);
      EXPECT_GE(trace[i], 0.0);
      if (i + 1 < trace.size()) {
        EXPECT_GE(trace[i], params.transmittance_min);
      }
      previous = trace[i];
    }
  }
}

TEST(TransmittanceTrace, OpaqueStackStopsEarly) {
  const Camera cam = axis_camera(9, 9, 10.0);
  SplatScene scene;
  for (int i = 0; i < 10; ++i) scene.gaussians.push_back(colored(Vec3(0, 0, 2 + i), 1.0, 1.0, Vec3(1, 1, 1)));
  const auto trace = transmittance_trace(scene, cam, {}, 4, 4);
  ASSERT_GE(trace.size(), 2u);
  ASSERT_LE(trace.size(), 3u);
  EXPECT_NEAR(trace[0], 0.01, 1e-6);
  EXPECT_LT(trace.back(), 1e-4);
}

TEST(Validation, CameraAndParams) {
  Camera cam = axis_camera(8, 8, 10.0);
  SplatScene scene;
  RenderParams params;
  params.tile_size = 0;
  EXPECT_EQ(thrown_code([&] { rasterize(scene, cam, params); }), ErrorCode::kInvalidArgument);
  params = {};
  params.alpha_min = 0.0;
  EXPECT_EQ(thrown_code([&] { rasterize(scene, cam, params); }), ErrorCode::kInvalidArgument);
  params = {};
  params.transmittance_min = 1.0;
  EXPECT_EQ(thrown_code([&] { rasterize(scene, cam, params); }), ErrorCode::kInvalidArgument);
  cam.fx = 0.0;
  EXPECT_EQ(thrown_code([&] { rasterize(scene, cam); }), ErrorCode::kInvalidArgument);
  cam = axis_camera(8, 8, 10.0);
  cam.near = 2.0;
  cam.far = 1.0;
  EXPECT_EQ(thrown_code([&] { rasterize_reference(scene, cam); }), ErrorCode::kInvalidArgument);
  cam = axis_camera(0, 8, 10.0);
  EXPECT_EQ(thrown_code([&] { rasterize(scene, cam); }), ErrorCode::kInvalidArgument);
}

TEST(Camera, CenterInWorldFrame) {
  const Camera cam = testing::look_at_camera(Vec3(1, 2, 3), Vec3::Zero(), 10, 10, 10.0);
  EXPECT_LT((cam.center() - Vec3(1, 2, 3)).norm(), 1e-12);
}

}  // namespace
}  // namespace splatrig
