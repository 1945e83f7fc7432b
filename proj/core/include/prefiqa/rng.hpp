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

#ifndef PREFIQA_RNG_HPP_
#define PREFIQA_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace prefiqa {

// SplitMix64. Every random decision in the toolkit draws from this generator
// so that crops, manifests, labels and weight initialisation reproduce
// bit-exactly across platforms and thread counts.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t Next() {
    state_ += 0x9E3779B97F4A7C15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform integer in [lo, hi] (inclusive) by rejection sampling, so the
  // distribution is exactly uniform.
  int64_t UniformInt(int64_t lo, int64_t hi) {
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<int64_t>(Next());  // full 64-bit span
    const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % range);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double UniformDouble() {
    return static_cast<double>(Next() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) {
    return lo + (hi - lo) * UniformDouble();
  }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

// Stateless mixing of a master seed with stream identifiers. Used to give
// every reference / pair / training step its own independent stream, which
// keeps results independent of processing order.
inline uint64_t MixSeed(uint64_t seed, std::initializer_list<uint64_t> keys) {
  uint64_t h = seed;
  for (uint64_t k : keys) {
    SplitMix64 g(h ^ (k * 0xD1B54A32D192ED03ull));
    h = g.Next();
  }
  return h;
}

// FNV-1a, for deriving seeds from string identifiers.
inline uint64_t HashString(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace prefiqa

#endif  // PREFIQA_RNG_HPP_
