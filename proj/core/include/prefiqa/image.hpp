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

#ifndef PREFIQA_IMAGE_HPP_
#define PREFIQA_IMAGE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace prefiqa {

// Interleaved 8-bit raster, row-major, 1 (gray) or 3 (RGB) channels.
class RasterImage {
 public:
  RasterImage() = default;
  // Zero-filled image. Throws kInvalidArgument on non-positive dimensions or
  // a channel count other than 1 or 3.
  RasterImage(int width, int height, int channels);
  // Takes ownership of `data`; its length must be width*height*channels.
  RasterImage(int width, int height, int channels, std::vector<uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  std::span<uint8_t> data() { return data_; }
  std::span<const uint8_t> data() const { return data_; }

  uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  bool SameShape(const RasterImage& o) const {
    return width_ == o.width_ && height_ == o.height_ &&
           channels_ == o.channels_;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<uint8_t> data_;
};

// Single float plane, the working representation for metrics.
class PlaneF32 {
 public:
  PlaneF32() = default;
  PlaneF32(int width, int height, float fill = 0.0f);
  PlaneF32(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float* Row(int y) { return data_.data() + static_cast<size_t>(y) * width_; }
  const float* Row(int y) const {
    return data_.data() + static_cast<size_t>(y) * width_;
  }
  float& at(int x, int y) { return Row(y)[x]; }
  float at(int x, int y) const { return Row(y)[x]; }

  friend bool operator==(const PlaneF32&, const PlaneF32&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

// BT.601 luma weights, shared with the codec's YCbCr transform.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

// Reads a binary PNM file: P6 (RGB) or P5 (gray), maxval 255. Failures are
// reported as kIo (cannot open/read), kMalformedHeader, kMalformedPayload
// (truncated data) or kUnsupportedFormat (other magic or maxval).
RasterImage LoadImage(const std::filesystem::path& path);

// Writes P6 for 3-channel and P5 for 1-channel images.
void SaveImage(const RasterImage& image, const std::filesystem::path& path);

// Luma plane in [0, 255]; a cast for single-channel input.
PlaneF32 ToGrayscale(const RasterImage& image);

// Returns a size x size image. Each dimension larger than `size` is cropped
// at an offset drawn uniformly from the valid range (x first, then y, both
// always drawn from SplitMix64(seed)); smaller dimensions are zero-padded
// with the content centered and the odd pixel going to the bottom/right.
RasterImage CropOrPad(const RasterImage& image, int size, uint64_t seed);

struct CropOffsets {
  int x = 0;  // crop offset in the source (0 when padding)
  int y = 0;
};
CropOffsets DrawCropOffsets(int width, int height, int size, uint64_t seed);

}  // namespace prefiqa

#endif  // PREFIQA_IMAGE_HPP_
