// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "augment.hpp"
#include "error.hpp"
#include "test_support.hpp"

namespace splatrig {
namespace {

using testing::Rng;
using testing::thrown_code;

AugmentParams neutral() {
  AugmentParams p;
  p.noise_sigma = 0.0;
  p.erase_prob = 0.0;
  p.brightness_lo = p.brightness_hi = 1.0;
  p.contrast_lo = p.contrast_hi = 1.0;
  return p;
}

TEST(AugmentImage, NeutralParamsAreIdentity) {
  Rng rng(61);
  const Image img = testing::random_image(rng, 37, 29);
  for (std::uint64_t index : {0u, 1u, 99u}) EXPECT_EQ(augment_image(img, neutral(), index), img);
}

TEST(AugmentImage, FixedContrastAndBrightnessMatchPointwiseOracle) {
  Rng rng(62);
  const Image img = testing::random_image(rng, 31, 17);
  AugmentParams p = neutral();
  p.contrast_lo = p.contrast_hi = 1.15;
  p.brightness_lo = p.brightness_hi = 0.9;
  const Image out = augment_image(img, p, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    double v = std::clamp(1.15 * (img.pixels[i] - 128.0) + 128.0, 0.0, 255.0);
    v = std::clamp(v * 0.9, 0.0, 255.0);
    EXPECT_EQ(out.pixels[i], static_cast<std::uint8_t>(std::floor(v + 0.5))) << i;
  }
}

TEST(AugmentImage, NoiseHasRequestedSpread) {
  AugmentParams p = neutral();
  p.noise_sigma = 10.0;
  const Image img(256, 256, 128);
  const Image out = augment_image(img, p, 0);
  double sum = 0.0;
  double sq = 0.0;
  for (auto v : out.pixels) {
    const double d = double(v) - 128.0;
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(out.pixels.size());
  EXPECT_NEAR(sum / n, 0.0, 0.1);
  const double sd = std::sqrt(sq / n);
  EXPECT_GE(sd, 9.5);
  EXPECT_LE(sd, 10.5);
}

TEST(AugmentImage, EraseFillsOneUniformRectangle) {
  Rng rng(63);
  AugmentParams p = neutral();
  p.erase_prob = 1.0;
  p.erase_area_min = p.erase_area_max = 0.25;
  for (std::uint64_t index = 0; index < 20; ++index) {
    const Image img = testing::random_image(rng, 64, 48);
    const Image out = augment_image(img, p, index);
    int x0 = 64, y0 = 48, x1 = -1, y1 = -1;
    for (int y = 0; y < 48; ++y) {
      for (int x = 0; x < 64; ++x) {
        if (out.at(x, y, 0) != img.at(x, y, 0) || out.at(x, y, 1) != img.at(x, y, 1) ||
            out.at(x, y, 2) != img.at(x, y, 2)) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
      }
    }
    ASSERT_GE(x1, x0) << index;
    const std::uint8_t fill = out.at(x0, y0, 0);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(x, y, c), fill);
      }
    }
    const double area = double(x1 - x0 + 1) * double(y1 - y0 + 1) / (64.0 * 48.0);
    EXPECT_GT(area, 0.2) << index;
    EXPECT_LT(area, 0.3) << index;
  }
}

TEST(AugmentImage, EveryStageResponds) {
  Rng rng(65);
  const Image img = testing::random_image(rng, 24, 24);
  AugmentParams p = neutral();
  p.contrast_lo = 0.5;
  EXPECT_NE(augment_image(img, p, 1), img);
  p = neutral();
  p.brightness_hi = 1.5;
  EXPECT_NE(augment_image(img, p, 1), img);
  p = neutral();
  p.noise_sigma = 3.0;
  EXPECT_NE(augment_image(img, p, 1), img);
}

TEST(AugmentImage, DeterministicPerSeedAndIndex) {
  Rng rng(64);
  const Image img = testing::random_image(rng, 40, 40);
  AugmentParams p;
  p.seed = 1234;
  const Image a = augment_image(img, p, 7);
  EXPECT_EQ(augment_image(img, p, 7), a);
  EXPECT_NE(augment_image(img, p, 8), a);
  p.seed = 1235;
  EXPECT_NE(augment_image(img, p, 7), a);
}

TEST(AugmentImage, ErasesAboutHalfTheFramesByDefault) {
  const Image img(16, 16, 128);
  AugmentParams p;
  p.noise_sigma = 0.0;
  p.brightness_lo = p.brightness_hi = 1.0;
  p.contrast_lo = p.contrast_hi = 1.0;
  int erased = 0;
  for (std::uint64_t index = 0; index < 400; ++index) erased += augment_image(img, p, index) != img;
  EXPECT_GT(erased, 150);
  EXPECT_LT(erased, 250);
}

TEST(AugmentParams, Validation) {
  const Image img(4, 4);
  auto check = [&](auto mutate) {
    AugmentParams p;
    mutate(p);
    return thrown_code([&] { augment_image(img, p, 0); });
  };
  EXPECT_EQ(check([](AugmentParams& p) { p.noise_sigma = -1; }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(check([](AugmentParams& p) { p.erase_prob = 1.5; }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(check([](AugmentParams& p) { p.erase_area_min = 0.5; p.erase_area_max = 0.1; }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(check([](AugmentParams& p) { p.brightness_lo = 2.0; }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(check([](AugmentParams& p) { p.contrast_lo = -0.1; }), ErrorCode::kInvalidArgument);
  EXPECT_FALSE(check([](AugmentParams&) {}));
}

}  // namespace
}  // namespace splatrig
