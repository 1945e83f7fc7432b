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

#ifndef PREFIQA_NN_TAPE_HPP_
#define PREFIQA_NN_TAPE_HPP_

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "prefiqa/nn/tensor.hpp"

namespace prefiqa::nn {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int index = -1;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Reverse-mode tape. Values are appended in execution order; Backward walks
// them in reverse. Gradients, including those of parameters, live on the
// tape, so independent tapes over the same (read-only) parameters can run on
// different threads and be reduced afterwards in a fixed order.
//
// A tape created with record = false keeps values only (inference).
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  // Leaf that never receives a gradient.
  Var Constant(Tensor value);
  // Leaf bound to a parameter. Repeated calls with the same parameter return
  // the same node, so every use of a shared weight accumulates into one
  // gradient.
  Var Param(const Parameter& param);

  const Tensor& value(Var v) const { return nodes_[v.index].value; }
  // Gradient of the last Backward() with respect to v (zeros if unreached).
  std::span<const float> grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.index].requires_grad; }

  // Seeds d(loss)/d(loss) = 1 and propagates. kShapeMismatch unless loss
  // holds exactly one element; kInvalidArgument on a non-recording tape.
  void Backward(Var loss);

  // Gradient accumulated for `param` by Backward, or empty if the parameter
  // was not used on this tape.
  std::span<const float> ParamGrad(const Parameter& param) const;

  // Adds this tape's gradient for each listed parameter into the
  // parameter's own gradient buffer (allocating it if needed).
  void AccumulateParamGrads(std::span<Parameter* const> params) const;

  size_t size() const { return nodes_.size(); }

  // Op plumbing: records a node whose backward closure reads the output
  // gradient and adds into its inputs' gradients via AddGrad().
  using BackwardFn = std::function<void(Tape&, int self)>;
  Var Record(Tensor value, std::vector<int> inputs, BackwardFn backward);
  std::span<float> MutableGrad(int index);
  std::span<const float> OutputGrad(int index) const { return nodes_[index].grad; }
  bool NeedsGrad(int index) const { return nodes_[index].requires_grad; }

 private:
  struct Node {
    Tensor value;
    FloatBuffer grad;
    std::vector<int> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

enum class Padding { kSame, kValid };

// Output spatial size of a convolution along one axis.
int ConvOutputSize(int in, int kernel, int stride, Padding padding);

// 2-D cross-correlation. x: N x H x W x Cin, weights: K x K x Cin x Cout,
// bias: Cout. 'same' padding follows the TensorFlow convention
// (out = ceil(in / stride), extra padding at the bottom/right).
Var Conv2d(Var x, Var weights, Var bias, int stride, Padding padding);

Var Relu(Var x);
Var Sigmoid(Var x);

// x: N x F, weights: F x O, bias: O -> N x O.
Var Affine(Var x, Var weights, Var bias);

// N x H x W x C -> N x C spatial mean.
Var GlobalAvgPool(Var x);

// Concatenates along the channel (last) axis, a's channels first. All other
// dimensions must agree.
Var ConcatChannels(Var a, Var b);

// Sum of all elements -> shape [1].
Var Sum(Var x);
Var Scale(Var x, float factor);

inline constexpr double kBceEpsilon = 1e-7;

// Soft-label binary cross-entropy on a probability p clamped to
// [eps, 1 - eps]: -(t ln p + (1 - t) ln(1 - p)).
double BceSoft(double p, double t);
// d/dp of BceSoft at the clamped p: (p - t) / (p (1 - p)).
double BceSoftGrad(double p, double t);

// Mean BceSoft over all elements of `pred` against `targets` (same length)
// -> shape [1]. The clamp passes gradients straight through.
Var BceSoftLoss(Var pred, std::span<const float> targets);

}  // namespace prefiqa::nn

#endif  // PREFIQA_NN_TAPE_HPP_
