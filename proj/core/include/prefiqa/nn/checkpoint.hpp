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

#ifndef PREFIQA_NN_CHECKPOINT_HPP_
#define PREFIQA_NN_CHECKPOINT_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prefiqa/nn/tensor.hpp"

namespace prefiqa::nn {

// Binary weight container, all integers little-endian:
//
//   magic    "PFQCKPT\0"             8 bytes
//   version  u32 (= 1)
//   meta_len u32, metadata           UTF-8 JSON (config, provenance)
//   count    u32
//   count x { id_len u32, id bytes, rank u32, dims i32[rank],
//             data f32[prod(dims)] }
//
// Parameters are written in the order given, so identical models produce
// byte-identical files.
inline constexpr char kCheckpointMagic[8] = {'P', 'F', 'Q', 'C', 'K', 'P', 'T', '\0'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void WriteCheckpoint(const std::filesystem::path& path, const std::string& metadata,
                     std::span<const Parameter* const> params);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

// Copies checkpoint tensors into `params` by identifier. Every parameter
// must be present with an identical shape and the checkpoint may not carry
// unknown identifiers; violations throw kMalformedCheckpoint.
void RestoreParameters(const Checkpoint& checkpoint, std::span<Parameter* const> params);

}  // namespace prefiqa::nn

#endif  // PREFIQA_NN_CHECKPOINT_HPP_
