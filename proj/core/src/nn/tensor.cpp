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

#include "prefiqa/nn/tensor.hpp"

#include <algorithm>

#include "prefiqa/error.hpp"

namespace prefiqa::nn {

size_t NumElements(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {
void CheckShape(const Shape& shape) {
  if (shape.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "tensor shape must have rank >= 1");
  }
  for (int d : shape) {
    if (d <= 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor dimensions must be positive: " + ShapeString(shape));
    }
  }
}
}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  CheckShape(shape_);
  data_.assign(NumElements(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  CheckShape(shape_);
  if (data_.size() != NumElements(shape_)) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor data length " + std::to_string(data_.size()) +
                    " does not match shape " + ShapeString(shape_));
  }
}

std::span<float> Tensor::EnsureGrad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0f);
  return *grad_;
}

void Tensor::ZeroGrad() {
  if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0f);
}

}  // namespace prefiqa::nn
