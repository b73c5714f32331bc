// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "error.hpp"

namespace splatrig {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard, the <random> distributions are
// not; these conversions keep augmentation identical across standard
// libraries.
class Sampler {
 public:
  Sampler(std::uint64_t seed, std::uint64_t index) : engine_(splitmix64(seed ^ splitmix64(index))) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

}  // namespace

void AugmentParams::validate() const {
  if (!(noise_sigma >= 0.0)) fail(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  if (!(erase_prob >= 0.0 && erase_prob <= 1.0)) fail(ErrorCode::kInvalidArgument, "erase_prob must be in [0,1]");
  if (!(erase_area_min >= 0.0 && erase_area_min <= erase_area_max && erase_area_max <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "erase_area must be an ordered range inside [0,1]");
  }
  if (!(brightness_lo >= 0.0 && brightness_lo <= brightness_hi)) {
    fail(ErrorCode::kInvalidArgument, "brightness range must be ordered and non-negative");
  }
  if (!(contrast_lo >= 0.0 && contrast_lo <= contrast_hi)) {
    fail(ErrorCode::kInvalidArgument, "contrast range must be ordered and non-negative");
  }
}

Image augment_image(const Image& image, const AugmentParams& params, std::uint64_t index) {
  params.validate();
  Sampler rng(params.seed, index);
  const double contrast = rng.uniform(params.contrast_lo, params.contrast_hi);
  const double brightness = rng.uniform(params.brightness_lo, params.brightness_hi);
  const bool erase = rng.uniform() < params.erase_prob;
  const double area_fraction = rng.uniform(params.erase_area_min, params.erase_area_max);
  // Aspect ratio log-uniform in [0.3, 1/0.3].
  const double aspect = std::exp(rng.uniform(std::log(0.3), -std::log(0.3)));
  const double u_x = rng.uniform();
  const double u_y = rng.uniform();
  const double gray = std::floor(rng.uniform() * 256.0);

  Image out = image;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    double v = clamp255(contrast * (static_cast<double>(image.pixels[i]) - 128.0) + 128.0);
    v = clamp255(v * brightness);
    if (params.noise_sigma > 0.0) v = clamp255(v + params.noise_sigma * rng.normal());
    out.pixels[i] = static_cast<std::uint8_t>(std::floor(v + 0.5));
  }

  if (erase && out.width > 0 && out.height > 0) {
    const double area = area_fraction * out.width * out.height;
    const int eh = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1, out.height);
    const int ew = std::clamp(static_cast<int>(std::lround(std::sqrt(area / aspect))), 1, out.width);
    const int x0 = std::min(out.width - ew, static_cast<int>(u_x * (out.width - ew + 1)));
    const int y0 = std::min(out.height - eh, static_cast<int>(u_y * (out.height - eh + 1)));
    const auto fill = static_cast<std::uint8_t>(std::min(255.0, gray));
    for (int y = y0; y < y0 + eh; ++y) {
      for (int x = x0; x < x0 + ew; ++x) {
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = fill;
      }
    }
  }
  return out;
}

}  // namespace splatrig
