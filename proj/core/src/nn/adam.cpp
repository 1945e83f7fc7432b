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

#include "prefiqa/nn/adam.hpp"

#include <cmath>

namespace prefiqa::nn {

Adam::Adam(std::vector<Parameter*> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  state_.learning_rate = options.learning_rate;
  for (const Parameter* p : params_) {
    state_.first_moment.emplace_back(p->value.size(), 0.0f);
    state_.second_moment.emplace_back(p->value.size(), 0.0f);
  }
}

void Adam::Step() {
  ++state_.step;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state_.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state_.step));
  const double lr = state_.learning_rate;
  for (size_t pi = 0; pi < params_.size(); ++pi) {
    Parameter& p = *params_[pi];
    if (!p.trainable || !p.value.has_grad()) continue;
    auto w = p.value.data();
    const auto g = p.value.grad();
    auto& m = state_.first_moment[pi];
    auto& v = state_.second_moment[pi];
    for (size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      m[i] = static_cast<float>(b1 * m[i] + (1.0 - b1) * gi);
      v[i] = static_cast<float>(b2 * v[i] + (1.0 - b2) * gi * gi);
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] = static_cast<float>(w[i] - lr * m_hat / (std::sqrt(v_hat) + options_.epsilon));
    }
  }
}

void Adam::ZeroGrad() {
  for (Parameter* p : params_) p->value.ZeroGrad();
}

}  // namespace prefiqa::nn
