// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "image.hpp"

namespace splatrig {

struct AugmentParams {
  double noise_sigma = 5.0;  // gray levels
  double erase_prob = 0.5;
  double erase_area_min = 0.02;  // fraction of the image
  double erase_area_max = 0.2;
  double brightness_lo = 0.8;
  double brightness_hi = 1.2;
  double contrast_lo = 0.8;
  double contrast_hi = 1.2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Applied in order: contrast about mid-gray, brightness, per-channel Gaussian
// noise, then (with probability erase_prob) one rectangle filled with a
// uniform random gray. Deterministic in (image, params, index).
Image augment_image(const Image& image, const AugmentParams& params, std::uint64_t index);

}  // namespace splatrig
