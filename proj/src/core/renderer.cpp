// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"

namespace splatrig {

namespace {

// Real SH basis constants (Condon-Shortley phase), degree 0..3.
constexpr double kSh0 = 0.28209479177387814;
constexpr double kSh1 = 0.4886025119029199;
constexpr double kSh2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005, -1.0925484305920792,
                            0.5462742152960396};
constexpr double kSh3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658, 0.3731763325901154,
                            -0.4570457994644658, 1.445305721320277,  -0.5900435899266435};

// Compositing-ready splat: screen mean, inverse 2D covariance (conic), color.
struct ScreenSplat {
  float mx = 0.f;
  float my = 0.f;
  float conic_a = 0.f;
  float conic_b = 0.f;
  float conic_c = 0.f;
  float opacity = 0.f;
  float color[3] = {0.f, 0.f, 0.f};
  float power_floor = -std::numeric_limits<float>::infinity();  // below it alpha < alpha_min for sure
};

// Slack on the log-space alpha cutoff so the exact test still decides every
// borderline pair.
constexpr float kPowerFloorMargin = 0.01f;

struct PixelRect {
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive
};

struct PreparedScene {
  std::vector<ScreenSplat> splats;  // depth-sorted, ties by scene index
  std::vector<PixelRect> rects;     // pixels where a splat can reach alpha_min
};

struct Thresholds {
  float alpha_min;
  float transmittance_min;
};

// Floors the eigenvalues of a symmetric 2x2 matrix.
Eigen::Matrix2d floor_eigenvalues(const Eigen::Matrix2d& m) {
  const double a = m(0, 0);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double c = m(1, 1);
  const double mid = 0.5 * (a + c);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
  const double lo = mid - disc;
  Eigen::Matrix2d out;
  out << a, b, b, c;
  if (lo >= kEigenFloor) return out;
  Eigen::Vector2d v;
  if (std::abs(b) > 0.0) {
    v = Eigen::Vector2d(lo - c, b);
  } else {
    v = a <= c ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
  }
  v.normalize();
  out += (kEigenFloor - lo) * v * v.transpose();
  const double hi = mid + disc;
  if (hi < kEigenFloor) out = Eigen::Matrix2d::Identity() * kEigenFloor;
  return out;
}

// Shared per-pixel compositing. `order` yields indices into splats in
// front-to-back order. Returns the final transmittance.
template <typename Indices>
float composite_pixel(const std::vector<ScreenSplat>& splats, const Indices& order, float px, float py,
                      const Thresholds& th, float rgb[3], std::vector<double>* trace = nullptr) {
  float t = 1.f;
  rgb[0] = rgb[1] = rgb[2] = 0.f;
  for (const auto idx : order) {
    const ScreenSplat& s = splats[idx];
    const float dx = s.mx - px;
    const float dy = s.my - py;
    const float power = -0.5f * (s.conic_a * dx * dx + s.conic_c * dy * dy) - s.conic_b * dx * dy;
    if (power > 0.f || power < s.power_floor) continue;
    const float alpha = std::min(static_cast<float>(kAlphaCap), s.opacity * std::exp(power));
    if (alpha < th.alpha_min) continue;
    const float w = t * alpha;
    rgb[0] += w * s.color[0];
    rgb[1] += w * s.color[1];
    rgb[2] += w * s.color[2];
    t *= 1.f - alpha;
    if (trace != nullptr) trace->push_back(t);
    if (t < th.transmittance_min) break;
  }
  return t;
}

std::uint8_t quantize(float v) {
  const float c = std::clamp(v, 0.f, 1.f);
  return static_cast<std::uint8_t>(std::floor(c * 255.f + 0.5f));
}

void write_pixel(Image& image, int x, int y, const float rgb[3], float t, const Vec3& background) {
  for (int c = 0; c < 3; ++c) {
    image.at(x, y, c) = quantize(rgb[c] + t * static_cast<float>(background[c]));
  }
}

PreparedScene prepare(const SplatScene& scene, const Camera& cam, const RenderParams& params) {
  struct Projected {
    bool visible = false;
    double depth = 0.0;
    ScreenSplat splat;
    PixelRect rect;
  };
  std::vector<Projected> projected(scene.size());
  parallel_for(
      scene.size(), params.jobs,
      [&](std::size_t i) {
        const auto s = project_gaussian(scene.gaussians[i], cam, scene.sh_degree);
        if (!s) return;
        Projected& p = projected[i];
        p.visible = true;
        p.depth = s->depth;
        const Eigen::Matrix2d cov = floor_eigenvalues(s->cov2d);
        const Eigen::Matrix2d conic = cov.inverse();
        p.splat.mx = static_cast<float>(s->mean2d.x());
        p.splat.my = static_cast<float>(s->mean2d.y());
        p.splat.conic_a = static_cast<float>(conic(0, 0));
        p.splat.conic_b = static_cast<float>(0.5 * (conic(0, 1) + conic(1, 0)));
        p.splat.conic_c = static_cast<float>(conic(1, 1));
        p.splat.opacity = static_cast<float>(s->opacity);
        for (int c = 0; c < 3; ++c) p.splat.color[c] = static_cast<float>(s->color[c]);
        p.splat.power_floor = static_cast<float>(std::log(params.alpha_min / s->opacity)) - kPowerFloorMargin;

        // alpha >= alpha_min needs d^T cov^-1 d <= 2 ln(opacity / alpha_min);
        // that ellipse has half-widths sqrt(k cov_xx), sqrt(k cov_yy). One
        // extra pixel absorbs float rounding in the compositor.
        const double reach = std::min(s->opacity, kAlphaCap);
        if (reach < params.alpha_min) return;
        const double k = 2.0 * std::log(s->opacity / params.alpha_min);
        const double ex = std::sqrt(std::max(0.0, k * cov(0, 0))) + 1.0;
        const double ey = std::sqrt(std::max(0.0, k * cov(1, 1))) + 1.0;
        const double mx = s->mean2d.x();
        const double my = s->mean2d.y();
        const double fx0 = std::ceil(mx - ex);
        const double fx1 = std::floor(mx + ex);
        const double fy0 = std::ceil(my - ey);
        const double fy1 = std::floor(my + ey);
        if (!(fx1 >= 0.0 && fy1 >= 0.0 && fx0 <= cam.width - 1 && fy0 <= cam.height - 1)) return;
        p.rect.x0 = static_cast<int>(std::max(0.0, fx0));
        p.rect.x1 = static_cast<int>(std::min<double>(cam.width - 1, fx1));
        p.rect.y0 = static_cast<int>(std::max(0.0, fy0));
        p.rect.y1 = static_cast<int>(std::min<double>(cam.height - 1, fy1));
      },
      1024);

  std::vector<std::uint32_t> order;
  order.reserve(scene.size());
  for (std::size_t i = 0; i < projected.size(); ++i) {
    if (projected[i].visible) order.push_back(static_cast<std::uint32_t>(i));
  }
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return projected[a].depth < projected[b].depth || (projected[a].depth == projected[b].depth && a < b);
  });
  PreparedScene out;
  out.splats.reserve(order.size());
  out.rects.reserve(order.size());
  for (std::uint32_t i : order) {
    out.splats.push_back(projected[i].splat);
    out.rects.push_back(projected[i].rect);
  }
  return out;
}

Thresholds thresholds(const RenderParams& params) {
  return {static_cast<float>(params.alpha_min), static_cast<float>(params.transmittance_min)};
}

}  // namespace

void Camera::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) fail(ErrorCode::kInvalidArgument, "camera '" + id + "': focal lengths must be positive");
  if (!(near > 0.0 && near < far)) fail(ErrorCode::kInvalidArgument, "camera '" + id + "': need 0 < near < far");
  if (width < 1 || height < 1) fail(ErrorCode::kInvalidArgument, "camera '" + id + "': image size must be >= 1");
}

Vec3 Camera::center() const { return invert(world_to_cam).translation(); }

void RenderParams::validate() const {
  if (tile_size < 1) fail(ErrorCode::kInvalidArgument, "tile_size must be >= 1");
  if (!(alpha_min > 0.0 && alpha_min < 1.0)) fail(ErrorCode::kInvalidArgument, "alpha_min must be in (0,1)");
  if (!(transmittance_min >= 0.0 && transmittance_min < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "transmittance_min must be in [0,1)");
  }
}

Vec3 eval_sh(std::span<const std::array<double, 3>> coeffs, const Vec3& dir, int degree) {
  if (degree < 0 || degree > kMaxShDegree) fail(ErrorCode::kInvalidArgument, "SH degree must be in [0,3]");
  if (coeffs.size() < static_cast<std::size_t>(sh_bases_for_degree(degree))) {
    fail(ErrorCode::kInvalidArgument, "too few SH coefficients for degree " + std::to_string(degree));
  }
  if (std::abs(dir.norm() - 1.0) > 1e-6) fail(ErrorCode::kInvalidArgument, "SH view direction must be unit length");

  std::array<double, kMaxShBases> basis{};
  basis[0] = kSh0;
  if (degree >= 1) {
    const double x = dir.x(), y = dir.y(), z = dir.z();
    basis[1] = -kSh1 * y;
    basis[2] = kSh1 * z;
    basis[3] = -kSh1 * x;
    if (degree >= 2) {
      const double xx = x * x, yy = y * y, zz = z * z, xy = x * y, yz = y * z, xz = x * z;
      basis[4] = kSh2[0] * xy;
      basis[5] = kSh2[1] * yz;
      basis[6] = kSh2[2] * (2.0 * zz - xx - yy);
      basis[7] = kSh2[3] * xz;
      basis[8] = kSh2[4] * (xx - yy);
      if (degree >= 3) {
        basis[9] = kSh3[0] * y * (3.0 * xx - yy);
        basis[10] = kSh3[1] * xy * z;
        basis[11] = kSh3[2] * y * (4.0 * zz - xx - yy);
        basis[12] = kSh3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
        basis[13] = kSh3[4] * x * (4.0 * zz - xx - yy);
        basis[14] = kSh3[5] * z * (xx - yy);
        basis[15] = kSh3[6] * x * (xx - 3.0 * yy);
      }
    }
  }
  Vec3 rgb = Vec3::Constant(0.5);
  const int n = sh_bases_for_degree(degree);
  for (int b = 0; b < n; ++b) {
    for (int c = 0; c < 3; ++c) rgb[c] += basis[b] * coeffs[b][c];
  }
  return rgb.cwiseMax(0.0).cwiseMin(1.0);
}

std::optional<Splat2D> project_gaussian(const Gaussian3D& g, const Camera& cam, int sh_degree) {
  const Vec3 t = cam.world_to_cam.apply(g.mean);
  if (!(t.z() >= cam.near && t.z() <= cam.far)) return std::nullopt;

  const double inv_z = 1.0 / t.z();
  Splat2D s;
  s.depth = t.z();
  s.mean2d = Eigen::Vector2d(cam.fx * t.x() * inv_z + cam.cx, cam.fy * t.y() * inv_z + cam.cy);

  Eigen::Matrix<double, 2, 3> jac;
  jac << cam.fx * inv_z, 0.0, -cam.fx * t.x() * inv_z * inv_z,  //
      0.0, cam.fy * inv_z, -cam.fy * t.y() * inv_z * inv_z;
  const Mat3 w = cam.world_to_cam.rotation();
  const Mat3 sigma = build_covariance(g.scale, g.rotation).matrix;
  const Eigen::Matrix<double, 2, 3> jw = jac * w;
  s.cov2d = jw * sigma * jw.transpose();
  s.cov2d(0, 1) = s.cov2d(1, 0) = 0.5 * (s.cov2d(0, 1) + s.cov2d(1, 0));
  s.cov2d(0, 0) += kCovarianceDilation;
  s.cov2d(1, 1) += kCovarianceDilation;

  Vec3 dir = g.mean - cam.center();
  const double n = dir.norm();
  dir = n > 0.0 ? Vec3(dir / n) : Vec3::UnitZ();
  s.color = eval_sh(g.sh, dir, sh_degree);
  s.opacity = g.opacity;
  return s;
}

Image rasterize(const SplatScene& scene, const Camera& cam, const RenderParams& params) {
  cam.validate();
  params.validate();
  Image image(cam.width, cam.height);
  const PreparedScene prepared = prepare(scene, cam, params);
  const Thresholds th = thresholds(params);

  const int ts = params.tile_size;
  const int tiles_x = (cam.width + ts - 1) / ts;
  const int tiles_y = (cam.height + ts - 1) / ts;
  const std::size_t tile_count = static_cast<std::size_t>(tiles_x) * static_cast<std::size_t>(tiles_y);

  // Counting sort into per-tile lists; splats are visited in depth order so
  // every list comes out depth-sorted.
  std::vector<std::uint32_t> offsets(tile_count + 1, 0);
  for (const PixelRect& r : prepared.rects) {
    if (r.x1 < r.x0) continue;
    for (int ty = r.y0 / ts; ty <= r.y1 / ts; ++ty) {
      for (int tx = r.x0 / ts; tx <= r.x1 / ts; ++tx) ++offsets[static_cast<std::size_t>(ty) * tiles_x + tx + 1];
    }
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::uint32_t> entries(offsets.back());
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t s = 0; s < prepared.rects.size(); ++s) {
    const PixelRect& r = prepared.rects[s];
    if (r.x1 < r.x0) continue;
    for (int ty = r.y0 / ts; ty <= r.y1 / ts; ++ty) {
      for (int tx = r.x0 / ts; tx <= r.x1 / ts; ++tx) {
        entries[cursor[static_cast<std::size_t>(ty) * tiles_x + tx]++] = static_cast<std::uint32_t>(s);
      }
    }
  }

  parallel_for(tile_count, params.jobs, [&](std::size_t tile) {
    const int tx = static_cast<int>(tile % tiles_x);
    const int ty = static_cast<int>(tile / tiles_x);
    const std::span<const std::uint32_t> list(entries.data() + offsets[tile], offsets[tile + 1] - offsets[tile]);
    const int x_end = std::min(cam.width, (tx + 1) * ts);
    const int y_end = std::min(cam.height, (ty + 1) * ts);
    for (int y = ty * ts; y < y_end; ++y) {
      for (int x = tx * ts; x < x_end; ++x) {
        float rgb[3];
        const float t = composite_pixel(prepared.splats, list, static_cast<float>(x), static_cast<float>(y), th, rgb);
        write_pixel(image, x, y, rgb, t, params.background);
      }
    }
  });
  return image;
}

Image rasterize_reference(const SplatScene& scene, const Camera& cam, const RenderParams& params) {
  cam.validate();
  params.validate();
  Image image(cam.width, cam.height);
  const PreparedScene prepared = prepare(scene, cam, params);
  const Thresholds th = thresholds(params);
  std::vector<std::uint32_t> all(prepared.splats.size());
  std::iota(all.begin(), all.end(), 0u);
  parallel_for(static_cast<std::size_t>(cam.height), params.jobs, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < cam.width; ++x) {
      float rgb[3];
      const float t = composite_pixel(prepared.splats, all, static_cast<float>(x), static_cast<float>(y), th, rgb);
      write_pixel(image, x, y, rgb, t, params.background);
    }
  });
  return image;
}

std::vector<double> transmittance_trace(const SplatScene& scene, const Camera& cam, const RenderParams& params,
                                        int x, int y) {
  cam.validate();
  params.validate();
  const PreparedScene prepared = prepare(scene, cam, params);
  std::vector<std::uint32_t> all(prepared.splats.size());
  std::iota(all.begin(), all.end(), 0u);
  std::vector<double> trace;
  float rgb[3];
  composite_pixel(prepared.splats, all, static_cast<float>(x), static_cast<float>(y), thresholds(params), rgb,
                  &trace);
  return trace;
}

}  // namespace splatrig
