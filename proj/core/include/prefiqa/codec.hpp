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

#ifndef PREFIQA_CODEC_HPP_
#define PREFIQA_CODEC_HPP_

#include <array>
#include <cstdint>

#include "prefiqa/image.hpp"

namespace prefiqa {

// JPEG quality setting, 1..100. Lower values quantize more coarsely.
class QualityFactor {
 public:
  // Throws kInvalidArgument outside [1, 100].
  explicit QualityFactor(int q);
  int value() const { return q_; }
  friend auto operator<=>(const QualityFactor&, const QualityFactor&) = default;

 private:
  int q_;
};

// 8x8 quantizer steps in natural (row-major, not zigzag) order.
class QuantTable {
 public:
  // Throws kInvalidArgument if any entry lies outside [1, 255].
  explicit QuantTable(const std::array<int, 64>& entries);
  int operator[](int i) const { return entries_[i]; }
  int at(int row, int col) const { return entries_[row * 8 + col]; }
  const std::array<int, 64>& entries() const { return entries_; }
  friend bool operator==(const QuantTable&, const QuantTable&) = default;

 private:
  std::array<int, 64> entries_;
};

// ITU T.81 Annex K tables K.1 / K.2.
const QuantTable& StandardLumaTable();
const QuantTable& StandardChromaTable();

// IJG quality scaling: S = 5000/q (q < 50) or 200 - 2q, entries
// floor((e*S + 50) / 100) clamped to [1, 255].
QuantTable ScaleQuantTable(const QuantTable& base, QualityFactor q);

using Block8x8 = std::array<float, 64>;

// Orthonormal 2-D DCT-II on a row-major block. Level shifting is the
// caller's job.
Block8x8 Fdct8x8(const Block8x8& block);
Block8x8 Idct8x8(const Block8x8& coeffs);

// Quantize-dequantize of a level-shifted spatial block: fdct, divide by the
// table with round-half-away-from-zero, multiply back, idct. Returns the
// number of nonzero quantized coefficients through `nonzero` when given.
Block8x8 QuantizeBlock(const Block8x8& block, const QuantTable& table,
                       int* nonzero = nullptr);

struct CompressResult {
  RasterImage image;
  // Count of nonzero quantized coefficients; the toolkit's file-size proxy
  // since no entropy coding is performed.
  int64_t nonzero_coefficients = 0;
};

// JPEG-style degradation of an RGB image: full-range BT.601 YCbCr, 4:4:4,
// edge-replicated 8x8 tiling, Annex K tables scaled by q, back to RGB with
// rounding and clamping. Output has the input's dimensions.
CompressResult CompressWithStats(const RasterImage& image, QualityFactor q);
RasterImage Compress(const RasterImage& image, QualityFactor q);

}  // namespace prefiqa

#endif  // PREFIQA_CODEC_HPP_
