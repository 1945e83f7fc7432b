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

#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "prefiqa/rng.hpp"

namespace prefiqa::test {

RasterImage RandomImage(int width, int height, int channels, uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<uint8_t> data(static_cast<size_t>(width) * height * channels);
  for (auto& v : data) v = static_cast<uint8_t>(rng.UniformInt(0, 255));
  return RasterImage(width, height, channels, std::move(data));
}

PlaneF32 RandomPlane(int width, int height, uint64_t seed) {
  SplitMix64 rng(seed);
  PlaneF32 p(width, height);
  for (float& v : p.data()) v = static_cast<float>(rng.UniformInt(0, 255));
  return p;
}

PlaneF32 PerturbPlane(const PlaneF32& base, float amp, uint64_t seed) {
  SplitMix64 rng(seed);
  PlaneF32 p = base;
  for (float& v : p.data()) {
    v = std::clamp(v + static_cast<float>(rng.Uniform(-amp, amp)), 0.0f, 255.0f);
  }
  return p;
}

PlaneF32 ConstantPlane(int width, int height, float value) {
  PlaneF32 p(width, height);
  std::fill(p.data().begin(), p.data().end(), value);
  return p;
}

oracle::Plane ToOracle(const PlaneF32& p) {
  oracle::Plane o;
  o.w = p.width();
  o.h = p.height();
  o.v.assign(p.data().begin(), p.data().end());
  return o;
}

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("prefiqa_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace prefiqa::test
