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

#include "prefiqa/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "prefiqa/error.hpp"
#include "prefiqa/rng.hpp"

namespace prefiqa {

namespace {

void CheckDims(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "image dimensions must be positive, got " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "unsupported channel count " + std::to_string(channels));
  }
}

// Minimal PNM header tokenizer: whitespace separated fields, '#' comments.
class HeaderReader {
 public:
  HeaderReader(const std::vector<char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  std::string Token() {
    SkipSpaceAndComments();
    std::string tok;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_])) &&
           bytes_[pos_] != '#') {
      tok.push_back(bytes_[pos_++]);
    }
    if (tok.empty()) Fail("unexpected end of header");
    return tok;
  }

  int Integer() {
    const std::string tok = Token();
    if (!std::all_of(tok.begin(), tok.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        tok.size() > 9) {
      Fail("invalid header field '" + tok + "'");
    }
    return std::stoi(tok);
  }

  // Exactly one whitespace byte separates the header from the raster.
  size_t PayloadStart() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      Fail("missing whitespace after maxval");
    }
    return pos_ + 1;
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kMalformedHeader, name_ + ": " + what);
  }

 private:
  void SkipSpaceAndComments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<char>& bytes_;
  std::string name_;
  size_t pos_ = 0;
};

}  // namespace

RasterImage::RasterImage(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  CheckDims(width, height, channels);
  data_.assign(static_cast<size_t>(width) * height * channels, 0);
}

RasterImage::RasterImage(int width, int height, int channels,
                         std::vector<uint8_t> data)
    : width_(width), height_(height), channels_(channels),
      data_(std::move(data)) {
  CheckDims(width, height, channels);
  if (data_.size() != static_cast<size_t>(width) * height * channels) {
    throw Error(ErrorCode::kInvalidArgument,
                "raster data length does not match width*height*channels");
  }
}

PlaneF32::PlaneF32(int width, int height, float fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "plane dimensions must be positive");
  }
  data_.assign(static_cast<size_t>(width) * height, fill);
}

PlaneF32::PlaneF32(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0 ||
      data_.size() != static_cast<size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument, "plane data length mismatch");
  }
}

RasterImage LoadImage(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + name);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for " + name);
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw Error(ErrorCode::kUnsupportedFormat,
                name + ": not a binary PNM file");
  }
  int channels = 0;
  if (bytes[1] == '6') {
    channels = 3;
  } else if (bytes[1] == '5') {
    channels = 1;
  } else {
    throw Error(ErrorCode::kUnsupportedFormat,
                name + ": unsupported PNM variant P" + std::string(1, bytes[1]));
  }
  std::vector<char> rest(bytes.begin() + 2, bytes.end());
  HeaderReader header(rest, name);
  const int width = header.Integer();
  const int height = header.Integer();
  const int maxval = header.Integer();
  if (width <= 0 || height <= 0) header.Fail("non-positive dimensions");
  if (maxval != 255) {
    throw Error(ErrorCode::kUnsupportedFormat,
                name + ": only maxval 255 is supported, got " +
                    std::to_string(maxval));
  }
  const size_t start = header.PayloadStart();
  const size_t expected = static_cast<size_t>(width) * height * channels;
  if (rest.size() - start < expected) {
    throw Error(ErrorCode::kMalformedPayload,
                name + ": truncated raster, expected " +
                    std::to_string(expected) + " bytes, found " +
                    std::to_string(rest.size() - start));
  }
  std::vector<uint8_t> data(rest.begin() + static_cast<std::ptrdiff_t>(start),
                            rest.begin() + static_cast<std::ptrdiff_t>(start + expected));
  return RasterImage(width, height, channels, std::move(data));
}

void SaveImage(const RasterImage& image, const std::filesystem::path& path) {
  if (image.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot save an empty image");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out << (image.channels() == 3 ? "P6" : "P5") << '\n'
      << image.width() << ' ' << image.height() << '\n'
      << 255 << '\n';
  const auto data = image.data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

PlaneF32 ToGrayscale(const RasterImage& image) {
  PlaneF32 plane(image.width(), image.height());
  auto out = plane.data();
  const auto in = image.data();
  if (image.channels() == 1) {
    for (size_t i = 0; i < out.size(); ++i) out[i] = in[i];
    return plane;
  }
  for (size_t i = 0; i < out.size(); ++i) {
    const double y = kLumaR * in[3 * i] + kLumaG * in[3 * i + 1] +
                     kLumaB * in[3 * i + 2];
    out[i] = static_cast<float>(std::clamp(y, 0.0, 255.0));
  }
  return plane;
}

CropOffsets DrawCropOffsets(int width, int height, int size, uint64_t seed) {
  SplitMix64 rng(seed);
  CropOffsets off;
  off.x = static_cast<int>(rng.UniformInt(0, std::max(0, width - size)));
  off.y = static_cast<int>(rng.UniformInt(0, std::max(0, height - size)));
  return off;
}

RasterImage CropOrPad(const RasterImage& image, int size, uint64_t seed) {
  if (size <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "crop size must be positive");
  }
  const int c = image.channels();
  RasterImage out(size, size, c);
  const CropOffsets off = DrawCropOffsets(image.width(), image.height(), size, seed);
  // Source window and destination placement per dimension.
  const int copy_w = std::min(image.width(), size);
  const int copy_h = std::min(image.height(), size);
  const int dst_x = image.width() < size ? (size - image.width()) / 2 : 0;
  const int dst_y = image.height() < size ? (size - image.height()) / 2 : 0;
  const int src_x = image.width() > size ? off.x : 0;
  const int src_y = image.height() > size ? off.y : 0;
  for (int y = 0; y < copy_h; ++y) {
    const uint8_t* src = &image.data()[(static_cast<size_t>(src_y + y) * image.width() + src_x) * c];
    uint8_t* dst = &out.data()[(static_cast<size_t>(dst_y + y) * size + dst_x) * c];
    std::copy(src, src + static_cast<size_t>(copy_w) * c, dst);
  }
  return out;
}

}  // namespace prefiqa
