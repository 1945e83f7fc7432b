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

#include "prefiqa/comparator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "prefiqa/codec.hpp"
#include "prefiqa/error.hpp"
#include "prefiqa/nn/adam.hpp"
#include "prefiqa/nn/checkpoint.hpp"
#include "prefiqa/parallel.hpp"
#include "prefiqa/rng.hpp"

namespace prefiqa {

namespace {

ConvLayer MakeConv(const std::string& name, int kernel, int cin, int cout,
                   double bound, SplitMix64& rng) {
  ConvLayer layer;
  layer.weights.id = name + ".weights";
  layer.weights.value = nn::Tensor({kernel, kernel, cin, cout});
  for (float& w : layer.weights.value.data()) {
    w = static_cast<float>(rng.Uniform(-bound, bound));
  }
  layer.bias.id = name + ".bias";
  layer.bias.value = nn::Tensor({cout}, 0.0f);
  return layer;
}

// Centered uniform init scaled by fan-in: sqrt(6 / fan_in) ahead of a ReLU,
// sqrt(3 / fan_in) for linear outputs.
double ReluBound(int fan_in) { return std::sqrt(6.0 / fan_in); }
double LinearBound(int fan_in) { return std::sqrt(3.0 / fan_in); }

nn::Var ConvBlock(nn::Tape& tape, nn::Var x, const ConvLayer& layer, int stride) {
  return nn::Conv2d(x, tape.Param(layer.weights), tape.Param(layer.bias), stride,
                    nn::Padding::kSame);
}

nn::Var Branch(const ComparatorModel& model, nn::Tape& tape, nn::Var x) {
  for (const ConvLayer& block : model.backbone) {
    x = nn::Relu(ConvBlock(tape, x, block, 2));
  }
  return ConvBlock(tape, x, model.bottleneck, 1);
}

void CheckInput(const ComparatorModel& model, const RasterImage& img) {
  const int s = model.config().input_size;
  if (img.width() != s || img.height() != s || img.channels() != 3) {
    throw Error(ErrorCode::kDimensionMismatch,
                "comparator expects " + std::to_string(s) + "x" + std::to_string(s) +
                    " RGB input, got " + std::to_string(img.width()) + "x" +
                    std::to_string(img.height()) + "x" + std::to_string(img.channels()));
  }
}

double ClampPreference(float p) {
  return std::clamp(static_cast<double>(p), kMinPreference, kMaxPreference);
}

}  // namespace

void ComparatorConfig::Validate() const {
  if (backbone_blocks <= 0 || backbone_base_channels <= 0 || bottleneck_maps <= 0 ||
      comparator_hidden_maps <= 0 || input_size <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "comparator config: all layer counts and the input size must be positive");
  }
  if (backbone_blocks > 12 || backbone_base_channels > 4096) {
    throw Error(ErrorCode::kInvalidArgument, "comparator config: backbone too large");
  }
}

int ComparatorConfig::PooledSide() const {
  int side = input_size;
  for (int i = 0; i < backbone_blocks; ++i) {
    side = nn::ConvOutputSize(side, 3, 2, nn::Padding::kSame);
  }
  return side;
}

std::string ConfigToJson(const ComparatorConfig& c) {
  nlohmann::ordered_json j;
  j["backbone_blocks"] = c.backbone_blocks;
  j["backbone_base_channels"] = c.backbone_base_channels;
  j["bottleneck_maps"] = c.bottleneck_maps;
  j["comparator_hidden_maps"] = c.comparator_hidden_maps;
  j["input_size"] = c.input_size;
  j["seed"] = c.seed;
  return j.dump();
}

ComparatorConfig ConfigFromJson(const std::string& json) {
  ComparatorConfig c;
  try {
    const auto j = nlohmann::json::parse(json);
    c.backbone_blocks = j.at("backbone_blocks").get<int>();
    c.backbone_base_channels = j.at("backbone_base_channels").get<int>();
    c.bottleneck_maps = j.at("bottleneck_maps").get<int>();
    c.comparator_hidden_maps = j.at("comparator_hidden_maps").get<int>();
    c.input_size = j.at("input_size").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedCheckpoint,
                std::string("comparator config: ") + e.what());
  }
  c.Validate();
  return c;
}

ComparatorModel::ComparatorModel(const ComparatorConfig& config) : config_(config) {
  config.Validate();
  SplitMix64 rng(MixSeed(config.seed, {0x1417}));
  int channels = 3;
  int width = config.backbone_base_channels;
  for (int i = 0; i < config.backbone_blocks; ++i) {
    backbone.push_back(MakeConv("backbone." + std::to_string(i), 3, channels, width,
                                ReluBound(9 * channels), rng));
    channels = width;
    width *= 2;
  }
  bottleneck = MakeConv("bottleneck", 1, channels, config.bottleneck_maps,
                        LinearBound(channels), rng);
  const int joined = 2 * config.bottleneck_maps;
  comparator_hidden = MakeConv("comparator.hidden", 1, joined,
                               config.comparator_hidden_maps, ReluBound(joined), rng);
  comparator_output = MakeConv("comparator.output", 1, config.comparator_hidden_maps, 1,
                               LinearBound(config.comparator_hidden_maps), rng);
  affine_weight.id = "affine.weight";
  affine_weight.value = nn::Tensor({1, 1}, static_cast<float>(rng.Uniform(-1.0, 1.0) *
                                                              LinearBound(1)));
  affine_bias.id = "affine.bias";
  affine_bias.value = nn::Tensor({1}, 0.0f);
}

std::vector<nn::Parameter*> ComparatorModel::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& b : backbone) {
    out.push_back(&b.weights);
    out.push_back(&b.bias);
  }
  for (ConvLayer* l : {&bottleneck, &comparator_hidden, &comparator_output}) {
    out.push_back(&l->weights);
    out.push_back(&l->bias);
  }
  out.push_back(&affine_weight);
  out.push_back(&affine_bias);
  return out;
}

std::vector<const nn::Parameter*> ComparatorModel::parameters() const {
  auto mut = const_cast<ComparatorModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

ComparatorModel BuildComparator(const ComparatorConfig& config) {
  return ComparatorModel(config);
}

nn::Tensor ImageToTensor(const RasterImage& image) {
  if (image.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "comparator input must be RGB");
  }
  nn::Tensor t({1, image.height(), image.width(), 3});
  const auto src = image.data();
  auto dst = t.data();
  for (size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<float>(src[i]) / 127.5f - 1.0f;
  }
  return t;
}

ComparatorTrace ForwardGraph(const ComparatorModel& model, nn::Tape& tape,
                             nn::Var image_a, nn::Var image_b) {
  ComparatorTrace tr;
  tr.features_a = Branch(model, tape, image_a);
  tr.features_b = Branch(model, tape, image_b);
  tr.concat = nn::ConcatChannels(tr.features_a, tr.features_b);
  nn::Var h = nn::Relu(ConvBlock(tape, tr.concat, model.comparator_hidden, 1));
  tr.comparator_map = ConvBlock(tape, h, model.comparator_output, 1);
  nn::Var pooled = nn::GlobalAvgPool(tr.comparator_map);
  tr.logit = nn::Affine(pooled, tape.Param(model.affine_weight),
                        tape.Param(model.affine_bias));
  tr.preference = nn::Sigmoid(tr.logit);
  return tr;
}

double Forward(const ComparatorModel& model, const RasterImage& a, const RasterImage& b) {
  CheckInput(model, a);
  CheckInput(model, b);
  nn::Tape tape(/*record=*/false);
  const ComparatorTrace tr =
      ForwardGraph(model, tape, tape.Constant(ImageToTensor(a)), tape.Constant(ImageToTensor(b)));
  return ClampPreference(tr.preference.value()[0]);
}

double ForwardSymmetrized(const ComparatorModel& model, const RasterImage& a,
                          const RasterImage& b) {
  const double ab = Forward(model, a, b);
  const double ba = Forward(model, b, a);
  // Both values are floats in [2^-24, 1 - 2^-24], so every step is exact.
  return 0.5 + (ab - ba) / 2.0;
}

double ComparePair(const ComparatorModel& model, const RasterImage& a,
                   const RasterImage& b, uint64_t crop_seed, bool symmetrized) {
  const int s = model.config().input_size;
  const RasterImage ca = CropOrPad(a, s, crop_seed);
  const RasterImage cb = CropOrPad(b, s, crop_seed);
  return symmetrized ? ForwardSymmetrized(model, ca, cb) : Forward(model, ca, cb);
}

std::vector<TrainingPair> MakeTrainingPairs(std::span<const PairImages> pairs) {
  std::vector<TrainingPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!p.record->label) {
      throw Error(ErrorCode::kMissingData, "train: unlabeled pair of '" + p.record->ref_id + "'");
    }
    out.push_back({p.a, p.b, static_cast<float>(*p.record->label)});
  }
  return out;
}

TrainResult Train(ComparatorModel& model, std::span<const TrainingPair> pairs,
                  const TrainOptions& opt) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "train: no training pairs");
  }
  if (opt.epochs < 0 || opt.steps_per_epoch < 0 || opt.batch_size <= 0 ||
      opt.learning_rate < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "train: invalid hyperparameters");
  }
  for (const auto& p : pairs) {
    if (!p.a || !p.b) throw Error(ErrorCode::kMissingData, "train: pair without images");
    if (!(p.label >= 0.0f && p.label <= 1.0f)) {
      throw Error(ErrorCode::kInvalidArgument, "train: label outside [0, 1]");
    }
  }
  const int size = model.config().input_size;
  auto params = model.parameters();
  nn::Adam adam(params, {.learning_rate = opt.learning_rate});

  size_t total = 0;
  std::vector<size_t> offsets;
  for (const auto* p : params) {
    offsets.push_back(total);
    total += p->value.size();
  }
  const int batch = opt.batch_size;
  std::vector<std::vector<float>> slot_grads(batch, std::vector<float>(total));
  std::vector<double> slot_loss(batch);
  const float inv_batch = 1.0f / static_cast<float>(batch);

  TrainResult result;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (int step = 0; step < opt.steps_per_epoch; ++step) {
      SplitMix64 sampler(MixSeed(opt.seed, {0x7A11, static_cast<uint64_t>(epoch),
                                            static_cast<uint64_t>(step)}));
      std::vector<size_t> picks(batch);
      for (auto& i : picks) i = static_cast<size_t>(sampler.UniformInt(0, pairs.size() - 1));

      ParallelFor(batch, opt.threads, [&](size_t i) {
        const TrainingPair& pair = pairs[picks[i]];
        const uint64_t crop_seed = MixSeed(opt.seed, {0xC409, static_cast<uint64_t>(epoch),
                                                      static_cast<uint64_t>(step), i});
        nn::Tape tape;
        nn::Var a = tape.Constant(ImageToTensor(CropOrPad(*pair.a, size, crop_seed)));
        nn::Var b = tape.Constant(ImageToTensor(CropOrPad(*pair.b, size, crop_seed)));
        const ComparatorTrace tr = ForwardGraph(model, tape, a, b);
        const float target = pair.label;
        nn::Var loss = nn::BceSoftLoss(tr.preference, std::span<const float>(&target, 1));
        slot_loss[i] = loss.value()[0];
        tape.Backward(nn::Scale(loss, inv_batch));
        auto& dst = slot_grads[i];
        for (size_t pi = 0; pi < params.size(); ++pi) {
          const auto g = tape.ParamGrad(*params[pi]);
          if (g.empty()) {
            std::fill_n(dst.begin() + offsets[pi], params[pi]->value.size(), 0.0f);
          } else {
            std::copy(g.begin(), g.end(), dst.begin() + offsets[pi]);
          }
        }
      });

      // Ordered reduction keeps the update independent of the thread count.
      adam.ZeroGrad();
      for (size_t pi = 0; pi < params.size(); ++pi) {
        auto g = params[pi]->value.EnsureGrad();
        for (int i = 0; i < batch; ++i) {
          const float* src = slot_grads[i].data() + offsets[pi];
          for (size_t k = 0; k < g.size(); ++k) g[k] += src[k];
        }
      }
      adam.Step();
      for (int i = 0; i < batch; ++i) epoch_loss += slot_loss[i];
    }
    const double mean = opt.steps_per_epoch > 0
                            ? epoch_loss / (static_cast<double>(opt.steps_per_epoch) * batch)
                            : 0.0;
    result.epoch_loss.push_back(mean);
    if (opt.on_epoch) opt.on_epoch(epoch, mean);
  }
  for (auto* p : params) p->value.DropGrad();
  return result;
}

RdTuneResult RdTune(const ComparatorModel& model, const RasterImage& ref, double tol,
                    int q_hi, uint64_t crop_seed) {
  if (!(tol > 0.0 && tol < 0.5)) {
    throw Error(ErrorCode::kInvalidArgument, "rd_tune: tolerance must be in (0, 0.5)");
  }
  if (q_hi <= kRdTuneQMin || q_hi > 100) {
    throw Error(ErrorCode::kInvalidArgument, "rd_tune: q_hi must be in (10, 100]");
  }
  const int s = model.config().input_size;
  const RasterImage anchor = CropOrPad(Compress(ref, QualityFactor(q_hi)), s, crop_seed);
  RdTuneResult r;
  r.q = q_hi;
  r.no_indistinguishable_point = true;
  // q_hi itself is the implicit upper bound (g(q_hi) = 0.5 by symmetry).
  int lo = kRdTuneQMin;
  int hi = q_hi;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    const RasterImage probe = CropOrPad(Compress(ref, QualityFactor(mid)), s, crop_seed);
    const double g = ForwardSymmetrized(model, anchor, probe);
    ++r.probes;
    r.probe_log.emplace_back(mid, g);
    if (std::abs(g - 0.5) <= tol) {
      hi = mid;
      r.q = mid;
      r.preference = g;
      r.no_indistinguishable_point = false;
    } else {
      lo = mid + 1;
    }
  }
  if (r.no_indistinguishable_point) r.preference = 0.5;
  return r;
}

void SaveComparator(const ComparatorModel& model, const std::filesystem::path& path,
                    const std::string& provenance_json) {
  nlohmann::ordered_json meta;
  meta["format"] = "prefiqa-comparator";
  meta["config"] = nlohmann::ordered_json::parse(ConfigToJson(model.config()));
  meta["provenance"] = nlohmann::ordered_json::parse(provenance_json);
  const auto params = model.parameters();
  nn::WriteCheckpoint(path, meta.dump(), params);
}

ComparatorModel LoadComparator(const std::filesystem::path& path) {
  const nn::Checkpoint ck = nn::ReadCheckpoint(path);
  ComparatorConfig config;
  try {
    const auto meta = nlohmann::json::parse(ck.metadata);
    if (meta.at("format") != "prefiqa-comparator") {
      throw Error(ErrorCode::kMalformedCheckpoint, path.string() + ": not a comparator checkpoint");
    }
    config = ConfigFromJson(meta.at("config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedCheckpoint, path.string() + ": " + e.what());
  }
  ComparatorModel model(config);
  nn::RestoreParameters(ck, model.parameters());
  return model;
}

}  // namespace prefiqa
