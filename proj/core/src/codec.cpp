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

#include "prefiqa/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "prefiqa/error.hpp"

namespace prefiqa {

namespace {

// cos_table[u][x] = a(u) cos((2x+1) u pi / 16), the orthonormal DCT-II basis.
struct DctBasis {
  double m[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        m[u][x] = a * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
  }
};

const DctBasis& Basis() {
  static const DctBasis basis;
  return basis;
}

// One YCbCr plane padded to a multiple of 8 by edge replication.
struct PaddedPlane {
  int width;
  int height;
  std::vector<float> data;
};

int RoundUp8(int v) { return (v + 7) / 8 * 8; }

}  // namespace

QualityFactor::QualityFactor(int q) : q_(q) {
  if (q < 1 || q > 100) {
    throw Error(ErrorCode::kInvalidArgument,
                "quality factor must be in [1, 100], got " + std::to_string(q));
  }
}

QuantTable::QuantTable(const std::array<int, 64>& entries) : entries_(entries) {
  for (int e : entries_) {
    if (e < 1 || e > 255) {
      throw Error(ErrorCode::kInvalidArgument,
                  "quantization table entry out of [1, 255]: " + std::to_string(e));
    }
  }
}

const QuantTable& StandardLumaTable() {
  static const QuantTable table({
      16, 11, 10, 16, 24,  40,  51,  61,   //
      12, 12, 14, 19, 26,  58,  60,  55,   //
      14, 13, 16, 24, 40,  57,  69,  56,   //
      14, 17, 22, 29, 51,  87,  80,  62,   //
      18, 22, 37, 56, 68,  109, 103, 77,   //
      24, 35, 55, 64, 81,  104, 113, 92,   //
      49, 64, 78, 87, 103, 121, 120, 101,  //
      72, 92, 95, 98, 112, 100, 103, 99,
  });
  return table;
}

const QuantTable& StandardChromaTable() {
  static const QuantTable table({
      17, 18, 24, 47, 99, 99, 99, 99,  //
      18, 21, 26, 66, 99, 99, 99, 99,  //
      24, 26, 56, 99, 99, 99, 99, 99,  //
      47, 66, 99, 99, 99, 99, 99, 99,  //
      99, 99, 99, 99, 99, 99, 99, 99,  //
      99, 99, 99, 99, 99, 99, 99, 99,  //
      99, 99, 99, 99, 99, 99, 99, 99,  //
      99, 99, 99, 99, 99, 99, 99, 99,
  });
  return table;
}

QuantTable ScaleQuantTable(const QuantTable& base, QualityFactor q) {
  const int quality = q.value();
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> out{};
  for (int i = 0; i < 64; ++i) {
    const int e = (base[i] * scale + 50) / 100;
    out[i] = std::clamp(e, 1, 255);
  }
  return QuantTable(out);
}

Block8x8 Fdct8x8(const Block8x8& block) {
  const auto& c = Basis().m;
  double tmp[8][8];
  // Rows: tmp[y][v] = sum_x c[v][x] * block[y][x]
  for (int y = 0; y < 8; ++y) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) s += c[v][x] * block[y * 8 + x];
      tmp[y][v] = s;
    }
  }
  Block8x8 out;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) s += c[u][y] * tmp[y][v];
      out[u * 8 + v] = static_cast<float>(s);
    }
  }
  return out;
}

Block8x8 Idct8x8(const Block8x8& coeffs) {
  const auto& c = Basis().m;
  double tmp[8][8];
  // tmp[y][v] = sum_u c[u][y] * coeffs[u][v]
  for (int y = 0; y < 8; ++y) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += c[u][y] * coeffs[u * 8 + v];
      tmp[y][v] = s;
    }
  }
  Block8x8 out;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += c[v][x] * tmp[y][v];
      out[y * 8 + x] = static_cast<float>(s);
    }
  }
  return out;
}

Block8x8 QuantizeBlock(const Block8x8& block, const QuantTable& table,
                       int* nonzero) {
  Block8x8 coeffs = Fdct8x8(block);
  int count = 0;
  for (int i = 0; i < 64; ++i) {
    const double level = std::round(static_cast<double>(coeffs[i]) / table[i]);
    if (level != 0.0) ++count;
    coeffs[i] = static_cast<float>(level * table[i]);
  }
  if (nonzero != nullptr) *nonzero = count;
  return Idct8x8(coeffs);
}

CompressResult CompressWithStats(const RasterImage& image, QualityFactor q) {
  if (image.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "compress requires a 3-channel image");
  }
  const int w = image.width();
  const int h = image.height();
  const int pw = RoundUp8(w);
  const int ph = RoundUp8(h);
  const auto rgb = image.data();

  std::array<PaddedPlane, 3> planes;
  for (auto& p : planes) {
    p.width = pw;
    p.height = ph;
    p.data.assign(static_cast<size_t>(pw) * ph, 0.0f);
  }
  for (int y = 0; y < ph; ++y) {
    const int sy = std::min(y, h - 1);
    for (int x = 0; x < pw; ++x) {
      const int sx = std::min(x, w - 1);
      const size_t s = (static_cast<size_t>(sy) * w + sx) * 3;
      const double r = rgb[s], g = rgb[s + 1], b = rgb[s + 2];
      const size_t d = static_cast<size_t>(y) * pw + x;
      planes[0].data[d] = static_cast<float>(kLumaR * r + kLumaG * g + kLumaB * b);
      planes[1].data[d] =
          static_cast<float>(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0);
      planes[2].data[d] =
          static_cast<float>(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0);
    }
  }

  const QuantTable luma = ScaleQuantTable(StandardLumaTable(), q);
  const QuantTable chroma = ScaleQuantTable(StandardChromaTable(), q);
  CompressResult result;
  for (int c = 0; c < 3; ++c) {
    const QuantTable& table = c == 0 ? luma : chroma;
    auto& plane = planes[c].data;
    for (int by = 0; by < ph; by += 8) {
      for (int bx = 0; bx < pw; bx += 8) {
        Block8x8 block;
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) {
            block[y * 8 + x] =
                plane[static_cast<size_t>(by + y) * pw + bx + x] - 128.0f;
          }
        }
        int nonzero = 0;
        const Block8x8 rec = QuantizeBlock(block, table, &nonzero);
        result.nonzero_coefficients += nonzero;
        for (int y = 0; y < 8; ++y) {
          for (int x = 0; x < 8; ++x) {
            plane[static_cast<size_t>(by + y) * pw + bx + x] =
                rec[y * 8 + x] + 128.0f;
          }
        }
      }
    }
  }

  std::vector<uint8_t> out(static_cast<size_t>(w) * h * 3);
  auto to_u8 = [](double v) {
    return static_cast<uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t s = static_cast<size_t>(y) * pw + x;
      const double yy = planes[0].data[s];
      const double cb = planes[1].data[s] - 128.0;
      const double cr = planes[2].data[s] - 128.0;
      const size_t d = (static_cast<size_t>(y) * w + x) * 3;
      out[d] = to_u8(yy + 1.402 * cr);
      out[d + 1] = to_u8(yy - 0.344136 * cb - 0.714136 * cr);
      out[d + 2] = to_u8(yy + 1.772 * cb);
    }
  }
  result.image = RasterImage(w, h, 3, std::move(out));
  return result;
}

RasterImage Compress(const RasterImage& image, QualityFactor q) {
  return CompressWithStats(image, q).image;
}

}  // namespace prefiqa
