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

#ifndef PREFIQA_NN_ADAM_HPP_
#define PREFIQA_NN_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "prefiqa/nn/tensor.hpp"

namespace prefiqa::nn {

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  double learning_rate = 0.001;
  std::vector<std::vector<float>> first_moment;   // one per parameter
  std::vector<std::vector<float>> second_moment;
  int64_t step = 0;
};

// Adam with bias correction. Reads Parameter::value.grad() (missing grads
// count as zero) and updates values in place. No weight decay.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamOptions options = {});

  void Step();
  // Zeroes the gradient buffers of every managed parameter.
  void ZeroGrad();

  const OptimizerState& state() const { return state_; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  AdamOptions options_;
  OptimizerState state_;
};

}  // namespace prefiqa::nn

#endif  // PREFIQA_NN_ADAM_HPP_
