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

#ifndef PREFIQA_SYNTHETIC_HPP_
#define PREFIQA_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include "prefiqa/image.hpp"

namespace prefiqa {

// Procedural stand-in for a photographic reference: fractal (1/f-like)
// colour noise, occluding flat and textured shapes with hard edges, and
// sensor-like grain. The mix of smooth areas, edges and texture varies per
// seed, which is what makes compression artifacts content dependent.
RasterImage MakeNaturalImage(int width, int height, uint64_t seed);

// `count` images seeded from MixSeed(seed, {i}).
std::vector<RasterImage> MakeNaturalCorpus(int count, int width, int height,
                                           uint64_t seed);

}  // namespace prefiqa

#endif  // PREFIQA_SYNTHETIC_HPP_
