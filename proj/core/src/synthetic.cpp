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

#include "prefiqa/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "prefiqa/rng.hpp"

namespace prefiqa {

namespace {

using Rgb = std::array<double, 3>;

double SmoothStep(double t) { return t * t * (3.0 - 2.0 * t); }

// Value noise with `cell`-pixel lattice spacing, values in [-1, 1].
std::vector<double> ValueNoise(int w, int h, int cell, SplitMix64& rng) {
  const int gw = w / cell + 2;
  const int gh = h / cell + 2;
  std::vector<double> lattice(static_cast<size_t>(gw) * gh);
  for (double& v : lattice) v = rng.Uniform(-1.0, 1.0);
  std::vector<double> out(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int iy = static_cast<int>(fy);
    const double ty = SmoothStep(fy - iy);
    for (int x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int ix = static_cast<int>(fx);
      const double tx = SmoothStep(fx - ix);
      const double v00 = lattice[static_cast<size_t>(iy) * gw + ix];
      const double v01 = lattice[static_cast<size_t>(iy) * gw + ix + 1];
      const double v10 = lattice[static_cast<size_t>(iy + 1) * gw + ix];
      const double v11 = lattice[static_cast<size_t>(iy + 1) * gw + ix + 1];
      out[static_cast<size_t>(y) * w + x] =
          (v00 * (1 - tx) + v01 * tx) * (1 - ty) + (v10 * (1 - tx) + v11 * tx) * ty;
    }
  }
  return out;
}

std::vector<double> FractalNoise(int w, int h, double beta, SplitMix64& rng) {
  std::vector<double> acc(static_cast<size_t>(w) * h, 0.0);
  double norm = 0.0;
  for (int cell = 64; cell >= 2; cell /= 2) {
    const double amp = std::pow(cell / 64.0, beta);
    const auto n = ValueNoise(w, h, cell, rng);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += amp * n[i];
    norm += amp;
  }
  for (double& v : acc) v /= norm;
  return acc;
}

Rgb RandomColor(SplitMix64& rng) {
  return {rng.Uniform(10, 245), rng.Uniform(10, 245), rng.Uniform(10, 245)};
}

double Gaussian(SplitMix64& rng) {
  // Box-Muller; u1 in (0, 1].
  const double u1 = 1.0 - rng.UniformDouble();
  const double u2 = rng.UniformDouble();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

RasterImage MakeNaturalImage(int width, int height, uint64_t seed) {
  SplitMix64 rng(MixSeed(seed, {0x5EED}));
  const size_t n = static_cast<size_t>(width) * height;
  std::vector<Rgb> px(n);

  // Background: smooth colour field.
  const double beta = rng.Uniform(0.6, 1.6);
  const auto lum = FractalNoise(width, height, beta, rng);
  const auto chroma_a = FractalNoise(width, height, beta + 0.3, rng);
  const auto chroma_b = FractalNoise(width, height, beta + 0.3, rng);
  const Rgb base = RandomColor(rng);
  const double contrast = rng.Uniform(30, 90);
  const double tint = rng.Uniform(5, 30);
  for (size_t i = 0; i < n; ++i) {
    px[i] = {base[0] + contrast * lum[i] + tint * chroma_a[i],
             base[1] + contrast * lum[i] - 0.5 * tint * (chroma_a[i] + chroma_b[i]),
             base[2] + contrast * lum[i] + tint * chroma_b[i]};
  }

  // Occluding shapes. Some are flat, some carry a grating or noise texture.
  const int shapes = static_cast<int>(rng.UniformInt(3, 28));
  const double scale = std::min(width, height);
  for (int s = 0; s < shapes; ++s) {
    const int kind = static_cast<int>(rng.UniformInt(0, 2));  // ellipse, rect, band
    const double cx = rng.Uniform(0, width);
    const double cy = rng.Uniform(0, height);
    const double rx = rng.Uniform(0.04, 0.35) * scale;
    const double ry = rng.Uniform(0.04, 0.35) * scale;
    const double angle = rng.Uniform(0, std::numbers::pi);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const Rgb color = RandomColor(rng);
    const int texture = static_cast<int>(rng.UniformInt(0, 2));  // flat, grating, grain
    const double freq = rng.Uniform(0.08, 0.9);
    const double tex_amp = rng.Uniform(8, 45);
    const double shade = rng.Uniform(-0.4, 0.4);
    SplitMix64 grain(rng.Next());
    const int x0 = std::max(0, static_cast<int>(cx - rx - ry - 1));
    const int x1 = std::min(width, static_cast<int>(cx + rx + ry + 2));
    const int y0 = std::max(0, static_cast<int>(cy - rx - ry - 1));
    const int y1 = std::min(height, static_cast<int>(cy + rx + ry + 2));
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double u = (ca * dx + sa * dy) / rx;
        const double v = (-sa * dx + ca * dy) / ry;
        bool inside = false;
        switch (kind) {
          case 0: inside = u * u + v * v <= 1.0; break;
          case 1: inside = std::abs(u) <= 1.0 && std::abs(v) <= 1.0; break;
          default: inside = std::abs(v) <= 0.25 && std::abs(u) <= 2.0; break;
        }
        if (!inside) continue;
        double t = shade * 40.0 * u;
        if (texture == 1) t += tex_amp * std::sin(freq * (ca * dx + sa * dy) * 2.0);
        if (texture == 2) t += tex_amp * 0.5 * Gaussian(grain);
        Rgb& p = px[static_cast<size_t>(y) * width + x];
        for (int c = 0; c < 3; ++c) p[c] = color[c] + t;
      }
    }
  }

  // Grain.
  const double noise = rng.Uniform(0.0, 5.0);
  std::vector<uint8_t> data(n * 3);
  for (size_t i = 0; i < n; ++i) {
    const double g = noise * Gaussian(rng);
    for (int c = 0; c < 3; ++c) {
      data[i * 3 + c] = static_cast<uint8_t>(std::clamp(std::round(px[i][c] + g), 0.0, 255.0));
    }
  }
  return RasterImage(width, height, 3, std::move(data));
}

std::vector<RasterImage> MakeNaturalCorpus(int count, int width, int height, uint64_t seed) {
  std::vector<RasterImage> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(MakeNaturalImage(width, height, MixSeed(seed, {static_cast<uint64_t>(i)})));
  }
  return out;
}

}  // namespace prefiqa
