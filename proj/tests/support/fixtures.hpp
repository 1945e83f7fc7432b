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

#ifndef PREFIQA_TESTS_FIXTURES_HPP_
#define PREFIQA_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "prefiqa/image.hpp"

namespace prefiqa::test {

// Uniform random samples from a SplitMix64 stream.
RasterImage RandomImage(int width, int height, int channels, uint64_t seed);
PlaneF32 RandomPlane(int width, int height, uint64_t seed);
// `base` plus seeded noise of amplitude `amp`, clamped to [0, 255].
PlaneF32 PerturbPlane(const PlaneF32& base, float amp, uint64_t seed);
PlaneF32 ConstantPlane(int width, int height, float value);

oracle::Plane ToOracle(const PlaneF32& p);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string ReadBytes(const std::filesystem::path& path);

}  // namespace prefiqa::test

#endif  // PREFIQA_TESTS_FIXTURES_HPP_
