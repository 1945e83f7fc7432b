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

#ifndef PREFIQA_COMPARATOR_HPP_
#define PREFIQA_COMPARATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prefiqa/dataset.hpp"
#include "prefiqa/image.hpp"
#include "prefiqa/nn/tape.hpp"
#include "prefiqa/nn/tensor.hpp"

namespace prefiqa {

struct ComparatorConfig {
  int backbone_blocks = 4;          // stride-2 3x3 conv + ReLU blocks
  int backbone_base_channels = 16;  // doubles per block
  int bottleneck_maps = 2;
  int comparator_hidden_maps = 256;
  int input_size = 400;
  uint64_t seed = 0;

  // kInvalidArgument when any count is non-positive.
  void Validate() const;
  // Spatial side of the map that enters global average pooling.
  int PooledSide() const;
  friend bool operator==(const ComparatorConfig&, const ComparatorConfig&) = default;
};

std::string ConfigToJson(const ComparatorConfig& config);
ComparatorConfig ConfigFromJson(const std::string& json);

struct ConvLayer {
  nn::Parameter weights;  // K x K x Cin x Cout
  nn::Parameter bias;     // Cout
};

// Pairwise preference network. Both inputs run through the same backbone
// and bottleneck parameter objects; the 2 x bottleneck_maps concatenation
// feeds a two-layer 1x1 comparator, global average pooling, a 1 -> 1 affine
// map and a sigmoid. The output is the predicted preference for the second
// image.
class ComparatorModel {
 public:
  // Builds with seeded, centered-uniform fan-in initialisation; biases zero.
  explicit ComparatorModel(const ComparatorConfig& config);

  const ComparatorConfig& config() const { return config_; }

  // Fixed order: backbone blocks, bottleneck, hidden, output, affine.
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;

  std::vector<ConvLayer> backbone;
  ConvLayer bottleneck;
  ConvLayer comparator_hidden;
  ConvLayer comparator_output;
  nn::Parameter affine_weight;  // 1 x 1
  nn::Parameter affine_bias;    // 1

 private:
  ComparatorConfig config_;
};

ComparatorModel BuildComparator(const ComparatorConfig& config);

// 1 x H x W x 3 tensor with samples mapped to [-1, 1].
nn::Tensor ImageToTensor(const RasterImage& image);

// Intermediate values of one recorded forward pass.
struct ComparatorTrace {
  nn::Var features_a;  // bottleneck output of the first image
  nn::Var features_b;
  nn::Var concat;
  nn::Var comparator_map;  // 1-map output before pooling
  nn::Var logit;
  nn::Var preference;      // N x 1, in (0, 1)
};

// Records the network on `tape` for N x S x S x 3 inputs.
ComparatorTrace ForwardGraph(const ComparatorModel& model, nn::Tape& tape,
                             nn::Var image_a, nn::Var image_b);

// Smallest and largest values Forward() can return; keeps outputs inside
// the open unit interval and makes the symmetrized identities exact.
inline constexpr double kMinPreference = 0x1.0p-24;
inline constexpr double kMaxPreference = 1.0 - 0x1.0p-24;

// Predicted preference for `b`. Both images must be input_size square
// (kDimensionMismatch otherwise). Pure; safe to call concurrently.
double Forward(const ComparatorModel& model, const RasterImage& a,
               const RasterImage& b);

// 0.5 + (Forward(a, b) - Forward(b, a)) / 2, i.e. the average of the two
// presentation orders; exactly 0.5 for a == b and p(a,b) + p(b,a) == 1.
double ForwardSymmetrized(const ComparatorModel& model, const RasterImage& a,
                          const RasterImage& b);

struct TrainingPair {
  std::shared_ptr<const RasterImage> a;
  std::shared_ptr<const RasterImage> b;
  float label = 0.5f;  // preference for b
};

// Labeled pairs of a manifest as training pairs; kMissingData when a
// record has no label.
std::vector<TrainingPair> MakeTrainingPairs(std::span<const PairImages> pairs);

struct TrainOptions {
  int epochs = 15;
  int steps_per_epoch = 150;
  int batch_size = 64;
  double learning_rate = 0.001;
  uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency; results do not depend on it
  // Called after every epoch with (epoch index, mean training loss).
  std::function<void(int, double)> on_epoch;
};

struct TrainResult {
  std::vector<double> epoch_loss;
};

// Minimises mean soft-label BCE of Forward(a, b) against the labels with
// Adam. Every step draws batch_size pairs uniformly with replacement and
// crops/pads both images of a pair with one shared per-sample seed. No
// weight decay, dropout or other regularisation.
TrainResult Train(ComparatorModel& model, std::span<const TrainingPair> pairs,
                  const TrainOptions& options);

// Crops/pads both images with the same seed, then runs ForwardSymmetrized.
double ComparePair(const ComparatorModel& model, const RasterImage& a,
                   const RasterImage& b, uint64_t crop_seed, bool symmetrized = true);

struct RdTuneResult {
  int q = 0;
  double preference = 0.5;  // g(q) at the returned q
  bool no_indistinguishable_point = false;
  int probes = 0;
  std::vector<std::pair<int, double>> probe_log;  // (q, g(q)) in probe order
};

inline constexpr int kRdTuneQMin = 10;

// Binary search over q in [10, q_hi] for the smallest probed q with
// |g(q) - 0.5| <= tol, where g(q) = p_sym(compress(ref, q_hi),
// compress(ref, q)) on a shared crop. At most ceil(log2(q_hi - 9)) probes.
// If no probe qualifies the result is q_hi with the flag set.
RdTuneResult RdTune(const ComparatorModel& model, const RasterImage& ref,
                    double tol, int q_hi = 99, uint64_t crop_seed = 0);

// Checkpoint with the config (and optional provenance JSON) as metadata.
void SaveComparator(const ComparatorModel& model, const std::filesystem::path& path,
                    const std::string& provenance_json = "{}");
ComparatorModel LoadComparator(const std::filesystem::path& path);

}  // namespace prefiqa

#endif  // PREFIQA_COMPARATOR_HPP_
