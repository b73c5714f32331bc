// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "alignment.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"
#include "spatial.hpp"

namespace splatrig {

namespace {

// Relative singular-value floor below which a point configuration is treated
// as collinear.
constexpr double kRankTolerance = 1e-10;

struct Correspondence {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  double dist2 = 0.0;
};

Vec3 apply_similarity(const RigidTransform& t, double s, const Vec3& x) {
  return s * (t.quaternion() * x) + t.translation();
}

// Gated nearest-neighbor pairs, trimmed to the best (1 - trim) fraction and
// returned in source order.
std::vector<Correspondence> correspondences(std::span<const Vec3> source, const KdTree3& tree,
                                            const RigidTransform& t, double s,
                                            const IcpParams& params) {
  std::vector<Correspondence> all(source.size());
  std::vector<char> ok(source.size(), 0);
  const double gate2 = params.max_correspondence_dist * params.max_correspondence_dist;
  parallel_for(
      source.size(), params.jobs,
      [&](std::size_t i) {
        const auto nn = tree.nearest(apply_similarity(t, s, source[i]));
        all[i] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(nn.index), nn.dist2};
        ok[i] = nn.dist2 <= gate2;
      },
      1024);
  std::vector<Correspondence> kept;
  kept.reserve(source.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (ok[i]) kept.push_back(all[i]);
  }
  if (kept.empty()) return kept;
  const auto keep = static_cast<std::size_t>(
      std::ceil(static_cast<double>(kept.size()) * (1.0 - params.trim_fraction)));
  if (keep < kept.size()) {
    std::nth_element(kept.begin(), kept.begin() + keep, kept.end(),
                     [](const Correspondence& a, const Correspondence& b) {
                       return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.source < b.source);
                     });
    kept.resize(keep);
    std::sort(kept.begin(), kept.end(),
              [](const Correspondence& a, const Correspondence& b) { return a.source < b.source; });
  }
  return kept;
}

double rms_of(const std::vector<Correspondence>& pairs) {
  double sum = 0.0;
  for (const auto& c : pairs) sum += c.dist2;
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

}  // namespace

void IcpParams::validate() const {
  if (max_iterations <= 0) fail(ErrorCode::kInvalidArgument, "icp max_iterations must be positive");
  if (!(convergence_tol > 0.0)) fail(ErrorCode::kInvalidArgument, "icp convergence_tol must be positive");
  if (!(max_correspondence_dist > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "icp max_correspondence_dist must be positive");
  }
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    fail(ErrorCode::kInvalidArgument, "icp trim_fraction must be in [0, 0.5)");
  }
}

SimilarityFit best_fit_transform(std::span<const Vec3> source, std::span<const Vec3> target,
                                 bool estimate_scale) {
  if (source.size() != target.size()) {
    fail(ErrorCode::kLengthMismatch, "best_fit_transform needs equally many source and target points");
  }
  if (source.size() < 3) {
    fail(ErrorCode::kDegenerateGeometry,
         "best_fit_transform needs at least 3 point pairs, got " + std::to_string(source.size()));
  }
  const double n = static_cast<double>(source.size());
  Vec3 mu_src = Vec3::Zero();
  Vec3 mu_dst = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mu_src += source[i];
    mu_dst += target[i];
  }
  mu_src /= n;
  mu_dst /= n;

  Mat3 cross = Mat3::Zero();
  Mat3 src_cov = Mat3::Zero();
  double src_var = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 a = source[i] - mu_src;
    const Vec3 b = target[i] - mu_dst;
    cross += b * a.transpose();
    src_cov += a * a.transpose();
    src_var += a.squaredNorm();
  }
  cross /= n;
  src_cov /= n;
  src_var /= n;

  const Eigen::JacobiSVD<Mat3> src_svd(src_cov);
  const Vec3 src_sv = src_svd.singularValues();
  if (!(src_sv[0] > 0.0) || src_sv[1] <= kRankTolerance * src_sv[0]) {
    fail(ErrorCode::kDegenerateGeometry, "source points are collinear or coincident");
  }

  const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 d = svd.singularValues();
  if (!(d[0] > 0.0) || d[1] <= kRankTolerance * d[0]) {
    fail(ErrorCode::kDegenerateGeometry, "target points are collinear or coincident");
  }
  Vec3 sign = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign[2] = -1.0;
  const Mat3 r = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();
  const double s = estimate_scale ? d.dot(sign) / src_var : 1.0;
  if (!(s > 0.0)) fail(ErrorCode::kDegenerateGeometry, "estimated scale is not positive");

  SimilarityFit fit;
  fit.scale = s;
  const RigidTransform rotation_only(r, Vec3::Zero());
  fit.transform = RigidTransform(rotation_only.quaternion(), mu_dst - s * (rotation_only.quaternion() * mu_src));
  return fit;
}

AlignmentResult icp_align(std::span<const Vec3> source, std::span<const Vec3> target,
                          const RigidTransform& init, const IcpParams& params) {
  params.validate();
  if (source.size() < 3 || target.size() < 3) {
    fail(ErrorCode::kDegenerateGeometry, "icp needs at least 3 source and 3 target points");
  }
  const KdTree3 tree(target);

  AlignmentResult result;
  result.transform = init;
  double previous = std::numeric_limits<double>::infinity();
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const auto pairs = correspondences(source, tree, result.transform, result.scale, params);
    if (pairs.empty()) {
      fail(ErrorCode::kNoOverlap, "no correspondences within " +
                                      std::to_string(params.max_correspondence_dist) +
                                      " m at icp iteration " + std::to_string(iter));
    }
    const double rms = rms_of(pairs);
    result.residual_history.push_back(rms);
    result.iterations = iter + 1;
    log_debug("icp iteration {}: {} pairs, rms {:.9g}", iter, pairs.size(), rms);
    if (std::abs(previous - rms) < params.convergence_tol) {
      result.converged = true;
      break;
    }
    previous = rms;

    src.clear();
    dst.clear();
    for (const auto& c : pairs) {
      src.push_back(source[c.source]);
      dst.push_back(tree.point(c.target));
    }
    const SimilarityFit fit = best_fit_transform(src, dst, params.estimate_scale);
    result.transform = fit.transform;
    result.scale = fit.scale;
  }

  const auto final_pairs = correspondences(source, tree, result.transform, result.scale, params);
  if (final_pairs.empty()) fail(ErrorCode::kNoOverlap, "icp diverged: no correspondences after final step");
  result.rms_residual = rms_of(final_pairs);
  return result;
}

AlignmentResult align_scene_to_robot(const SplatScene& scene, std::span<const Vec3> robot_reference,
                                     const Aabb& crop, const RigidTransform& init,
                                     const IcpParams& params) {
  std::vector<Vec3> cropped;
  for (const auto& g : scene.gaussians) {
    if (crop.contains(g.mean)) cropped.push_back(g.mean);
  }
  if (cropped.empty()) fail(ErrorCode::kInvalidArgument, "crop box selects no Gaussians");
  if (cropped.size() < 3) {
    fail(ErrorCode::kDegenerateGeometry,
         "crop box selects only " + std::to_string(cropped.size()) + " Gaussians (need 3)");
  }
  log_info("aligning {} cropped Gaussians against {} reference points", cropped.size(),
           robot_reference.size());
  return icp_align(cropped, robot_reference, init, params);
}

SplatScene rescale_scene(const SplatScene& scene, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::kInvalidArgument, "rescale factor must be positive");
  SplatScene out = scene;
  for (auto& g : out.gaussians) {
    g.mean *= s;
    g.scale *= s;
  }
  return out;
}

std::vector<Vec3> parse_points_xyz(std::istream& in) {
  std::vector<Vec3> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p[0] >> p[1] >> p[2])) {
      fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": expected 'x y z'");
    }
    std::string extra;
    if (ss >> extra) fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": trailing data");
    points.push_back(p);
  }
  return points;
}

std::vector<Vec3> load_points_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return parse_points_xyz(in);
}

}  // namespace splatrig
