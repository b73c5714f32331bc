// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numbers>

namespace splatrig::testing {

std::optional<ErrorCode> thrown_code(const std::function<void()>& fn, std::string* message) {
  try {
    fn();
  } catch (const Error& e) {
    if (message != nullptr) *message = e.what();
    return e.code();
  }
  return std::nullopt;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec3 random_vec3(Rng& rng, double lo, double hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    const Vec3 v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-3) return v.normalized();
  }
}

Quat random_quat(Rng& rng) {
  return Quat(Eigen::AngleAxisd(uniform(rng, 0.0, std::numbers::pi), random_unit(rng)));
}

RigidTransform random_rigid(Rng& rng, double max_translation) {
  return {random_quat(rng), random_vec3(rng, -max_translation, max_translation)};
}

Mat4 homogeneous(const Mat3& r, const Vec3& t) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

Mat4 homogeneous(const RigidTransform& t) { return homogeneous(t.rotation(), t.translation()); }

std::vector<Vec3> sample_box_surfaces(Rng& rng, const std::vector<Aabb>& boxes, int count) {
  std::vector<double> areas;
  for (const auto& b : boxes) {
    const Vec3 d = b.max - b.min;
    areas.push_back(2.0 * (d.x() * d.y() + d.y() * d.z() + d.x() * d.z()));
  }
  std::discrete_distribution<std::size_t> pick_box(areas.begin(), areas.end());
  std::vector<Vec3> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Aabb& b = boxes[pick_box(rng)];
    const Vec3 d = b.max - b.min;
    std::discrete_distribution<int> pick_axis({d.y() * d.z(), d.x() * d.z(), d.x() * d.y()});
    const int axis = pick_axis(rng);
    Vec3 p(uniform(rng, b.min.x(), b.max.x()), uniform(rng, b.min.y(), b.max.y()),
           uniform(rng, b.min.z(), b.max.z()));
    p[axis] = uniform(rng, 0.0, 1.0) < 0.5 ? b.min[axis] : b.max[axis];
    out.push_back(p);
  }
  return out;
}

std::vector<Aabb> arm_boxes() {
  return {
      {Vec3(-0.1, -0.1, 0.0), Vec3(0.1, 0.1, 0.1)},
      {Vec3(-0.04, -0.04, 0.1), Vec3(0.04, 0.04, 0.5)},
      {Vec3(-0.04, -0.04, 0.46), Vec3(0.35, 0.04, 0.54)},
      {Vec3(0.3, -0.03, 0.3), Vec3(0.36, 0.03, 0.46)},
      {Vec3(0.3, 0.03, 0.28), Vec3(0.34, 0.1, 0.32)},
  };
}

Gaussian3D random_gaussian(Rng& rng, int sh_degree, double extent) {
  Gaussian3D g;
  g.mean = random_vec3(rng, -extent, extent);
  g.rotation = random_quat(rng);
  g.scale = Vec3(uniform(rng, 0.02, 0.15), uniform(rng, 0.02, 0.15), uniform(rng, 0.005, 0.1)) * extent;
  g.opacity = uniform(rng, 0.05, 0.99);
  for (int b = 0; b < sh_bases_for_degree(sh_degree); ++b) {
    for (int c = 0; c < 3; ++c) g.sh[b][c] = b == 0 ? uniform(rng, -1.5, 1.5) : uniform(rng, -0.4, 0.4);
  }
  return g;
}

SplatScene random_scene(Rng& rng, int count, int sh_degree, double extent) {
  SplatScene s;
  s.sh_degree = sh_degree;
  for (int i = 0; i < count; ++i) s.gaussians.push_back(random_gaussian(rng, sh_degree, extent));
  return s;
}

Camera look_at_camera(const Vec3& eye, const Vec3& target, int width, int height, double focal) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(forward.dot(up)) > 0.95) up = Vec3::UnitX();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  Camera c;
  c.id = "cam";
  c.fx = focal;
  c.fy = focal;
  c.cx = 0.5 * (width - 1);
  c.cy = 0.5 * (height - 1);
  c.width = width;
  c.height = height;
  c.world_to_cam = RigidTransform(r, -(r * eye));
  return c;
}

Camera random_camera(Rng& rng, int width, int height, double distance) {
  const Vec3 eye = random_unit(rng) * distance;
  Camera c = look_at_camera(eye, random_vec3(rng, -0.1, 0.1), width, height, uniform(rng, 0.7, 1.3) * width);
  c.cx += uniform(rng, -3.0, 3.0);
  c.cy += uniform(rng, -3.0, 3.0);
  return c;
}

int max_channel_diff(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) return 256;
  int worst = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    worst = std::max(worst, std::abs(int(a.pixels[i]) - int(b.pixels[i])));
  }
  return worst;
}

Image random_image(Rng& rng, int width, int height) {
  Image img(width, height);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(rng));
  return img;
}

double naive_ssim(const Image& a, const Image& b) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  const double c1 = std::pow(0.01 * 255.0, 2);
  const double c2 = std::pow(0.03 * 255.0, 2);
  double w[kWin][kWin];
  double total_w = 0.0;
  for (int i = 0; i < kWin; ++i) {
    for (int j = 0; j < kWin; ++j) {
      const double di = i - kWin / 2;
      const double dj = j - kWin / 2;
      w[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * kSigma * kSigma));
      total_w += w[i][j];
    }
  }
  double channel_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0;
    int windows = 0;
    for (int y = 0; y + kWin <= a.height; ++y) {
      for (int x = 0; x + kWin <= a.width; ++x) {
        double ma = 0, mb = 0;
        for (int i = 0; i < kWin; ++i) {
          for (int j = 0; j < kWin; ++j) {
            const double wt = w[i][j] / total_w;
            ma += wt * a.at(x + j, y + i, c);
            mb += wt * b.at(x + j, y + i, c);
          }
        }
        double va = 0, vb = 0, cov = 0;
        for (int i = 0; i < kWin; ++i) {
          for (int j = 0; j < kWin; ++j) {
            const double wt = w[i][j] / total_w;
            const double da = a.at(x + j, y + i, c) - ma;
            const double db = b.at(x + j, y + i, c) - mb;
            va += wt * da * da;
            vb += wt * db * db;
            cov += wt * da * db;
          }
        }
        sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++windows;
      }
    }
    channel_sum += sum / windows;
  }
  return channel_sum / 3.0;
}

TempDir::TempDir(const std::string& prefix) {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto candidate = base / (prefix + "-" + std::to_string(rd()) + std::to_string(rd()));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  std::abort();
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::uint64_t hash_tree(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (const auto& f : files) {
    for (char ch : f.generic_string()) mix(static_cast<unsigned char>(ch));
    mix(0);
    std::ifstream in(root / f, std::ios::binary);
    for (auto it = std::istreambuf_iterator<char>(in); it != std::istreambuf_iterator<char>(); ++it) {
      mix(static_cast<unsigned char>(*it));
    }
    mix(0);
  }
  return h;
}

}  // namespace splatrig::testing
