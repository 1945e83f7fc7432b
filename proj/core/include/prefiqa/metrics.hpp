// Copyright 2026 The prefiqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PREFIQA_METRICS_HPP_
#define PREFIQA_METRICS_HPP_

#include <array>
#include <limits>

#include "prefiqa/image.hpp"

namespace prefiqa {

// Full-reference metrics on luma planes in [0, 255]. All functions are pure
// and throw kDimensionMismatch when the planes differ in size.

double Mse(const PlaneF32& a, const PlaneF32& b);

// Returned by Psnr for identical planes.
inline constexpr double kPsnrInfinite = std::numeric_limits<double>::infinity();

// 10 log10(255^2 / mse), or kPsnrInfinite when mse == 0.
double Psnr(const PlaneF32& a, const PlaneF32& b);

struct SsimParams {
  static constexpr int kWindow = 11;
  static constexpr double kSigma = 1.5;
  static constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
  static constexpr double kC2 = (0.03 * 255) * (0.03 * 255);
};

// Normalized 11-tap Gaussian (sigma 1.5); the 2-D window is its outer product.
const std::array<double, SsimParams::kWindow>& SsimKernel();

// Mean over valid window positions of the luminance term l, the
// contrast-structure term cs and their product (the SSIM map).
struct SsimComponents {
  double luminance = 0.0;
  double contrast_structure = 0.0;
  double ssim = 0.0;
};

// Requires both dimensions >= 11 (kImageTooSmall otherwise).
SsimComponents SsimTerms(const PlaneF32& a, const PlaneF32& b);
double Ssim(const PlaneF32& a, const PlaneF32& b);

inline constexpr int kMsSsimScales = 5;
inline constexpr std::array<double, kMsSsimScales> kMsSsimWeights = {
    0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
// Smallest side for which every scale still fits an 11x11 window.
inline constexpr int kMsSsimMinSide = SsimParams::kWindow << (kMsSsimScales - 1);

// 5-scale MS-SSIM: prod_j cs_j^w_j * l_5^w_5, where cs_j and l_5 are window
// means; scales are produced by 2x2 box averaging with decimation. Negative
// cs means are clamped to 0 before exponentiation.
double MsSsim(const PlaneF32& a, const PlaneF32& b);

// 2x2 box average with decimation (floor of odd sizes).
PlaneF32 Downsample2x(const PlaneF32& plane);

}  // namespace prefiqa

#endif  // PREFIQA_METRICS_HPP_
