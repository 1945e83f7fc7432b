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

#include "prefiqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "prefiqa/error.hpp"

namespace prefiqa {

namespace {

void CheckSameSize(const PlaneF32& a, const PlaneF32& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": plane sizes differ (" +
                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
  }
}

// Valid-mode separable filtering of a double image with the SSIM kernel.
std::vector<double> FilterValid(const std::vector<double>& in, int w, int h) {
  constexpr int k = SsimParams::kWindow;
  const auto& g = SsimKernel();
  const int ow = w - k + 1;
  const int oh = h - k + 1;
  std::vector<double> horiz(static_cast<size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    const double* row = &in[static_cast<size_t>(y) * w];
    double* out = &horiz[static_cast<size_t>(y) * ow];
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += g[i] * row[x + i];
      out[x] = s;
    }
  }
  std::vector<double> out(static_cast<size_t>(ow) * oh, 0.0);
  for (int y = 0; y < oh; ++y) {
    double* dst = &out[static_cast<size_t>(y) * ow];
    for (int i = 0; i < k; ++i) {
      const double* src = &horiz[static_cast<size_t>(y + i) * ow];
      const double gi = g[i];
      for (int x = 0; x < ow; ++x) dst[x] += gi * src[x];
    }
  }
  return out;
}

}  // namespace

double Mse(const PlaneF32& a, const PlaneF32& b) {
  CheckSameSize(a, b, "mse");
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sum += d * d;
  }
  return sum / static_cast<double>(da.size());
}

double Psnr(const PlaneF32& a, const PlaneF32& b) {
  const double mse = Mse(a, b);
  if (mse == 0.0) return kPsnrInfinite;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

const std::array<double, SsimParams::kWindow>& SsimKernel() {
  static const std::array<double, SsimParams::kWindow> kernel = [] {
    std::array<double, SsimParams::kWindow> g{};
    constexpr int r = SsimParams::kWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < SsimParams::kWindow; ++i) {
      const double x = i - r;
      g[i] = std::exp(-x * x / (2.0 * SsimParams::kSigma * SsimParams::kSigma));
      sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
  }();
  return kernel;
}

SsimComponents SsimTerms(const PlaneF32& a, const PlaneF32& b) {
  CheckSameSize(a, b, "ssim");
  const int w = a.width();
  const int h = a.height();
  if (w < SsimParams::kWindow || h < SsimParams::kWindow) {
    throw Error(ErrorCode::kImageTooSmall,
                "ssim: planes must be at least 11x11, got " +
                    std::to_string(w) + "x" + std::to_string(h));
  }
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  const auto da = a.data();
  const auto db = b.data();
  for (size_t i = 0; i < n; ++i) {
    x[i] = da[i];
    y[i] = db[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = FilterValid(x, w, h);
  const auto mu_y = FilterValid(y, w, h);
  const auto e_xx = FilterValid(xx, w, h);
  const auto e_yy = FilterValid(yy, w, h);
  const auto e_xy = FilterValid(xy, w, h);

  constexpr double c1 = SsimParams::kC1;
  constexpr double c2 = SsimParams::kC2;
  double sum_l = 0.0, sum_cs = 0.0, sum_ssim = 0.0;
  for (size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double var_x = e_xx[i] - mx * mx;
    const double var_y = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    const double l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
    const double cs = (2.0 * cov + c2) / (var_x + var_y + c2);
    sum_l += l;
    sum_cs += cs;
    sum_ssim += l * cs;
  }
  const double count = static_cast<double>(mu_x.size());
  return {sum_l / count, sum_cs / count, sum_ssim / count};
}

double Ssim(const PlaneF32& a, const PlaneF32& b) { return SsimTerms(a, b).ssim; }

PlaneF32 Downsample2x(const PlaneF32& plane) {
  const int ow = plane.width() / 2;
  const int oh = plane.height() / 2;
  if (ow == 0 || oh == 0) {
    throw Error(ErrorCode::kImageTooSmall, "cannot downsample below 1 pixel");
  }
  PlaneF32 out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    const float* r0 = plane.Row(2 * y);
    const float* r1 = plane.Row(2 * y + 1);
    float* dst = out.Row(y);
    for (int x = 0; x < ow; ++x) {
      const double s = static_cast<double>(r0[2 * x]) + r0[2 * x + 1] +
                       r1[2 * x] + r1[2 * x + 1];
      dst[x] = static_cast<float>(0.25 * s);
    }
  }
  return out;
}

double MsSsim(const PlaneF32& a, const PlaneF32& b) {
  CheckSameSize(a, b, "ms_ssim");
  if (a.width() < kMsSsimMinSide || a.height() < kMsSsimMinSide) {
    throw Error(ErrorCode::kImageTooSmall,
                "ms_ssim: planes must be at least " +
                    std::to_string(kMsSsimMinSide) + " pixels per side, got " +
                    std::to_string(a.width()) + "x" + std::to_string(a.height()));
  }
  PlaneF32 pa = a;
  PlaneF32 pb = b;
  double result = 1.0;
  for (int s = 0; s < kMsSsimScales; ++s) {
    if (s > 0) {
      pa = Downsample2x(pa);
      pb = Downsample2x(pb);
    }
    const SsimComponents t = SsimTerms(pa, pb);
    result *= std::pow(std::max(t.contrast_structure, 0.0), kMsSsimWeights[s]);
    if (s == kMsSsimScales - 1) {
      result *= std::pow(std::max(t.luminance, 0.0), kMsSsimWeights[s]);
    }
  }
  return result;
}

}  // namespace prefiqa
