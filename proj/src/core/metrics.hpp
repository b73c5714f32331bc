// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "image.hpp"

namespace splatrig {

// 10 log10(255^2 / MSE) over all channels. Identical images give +infinity;
// callers aggregating PSNR must handle that value explicitly.
double psnr(const Image& a, const Image& b);

// Mean SSIM over every full 11x11 window (Gaussian weights, sigma 1.5) per
// channel, averaged over channels. C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2.
double ssim(const Image& a, const Image& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

}  // namespace splatrig
