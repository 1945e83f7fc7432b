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

#ifndef PREFIQA_NN_TENSOR_HPP_
#define PREFIQA_NN_TENSOR_HPP_

#include <cstddef>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prefiqa::nn {

// Fixed 64-byte alignment: vectorized reductions peel by address, so a
// stable alignment keeps float results identical from run to run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

// Dimensions, outermost first. Image tensors are N x H x W x C.
using Shape = std::vector<int>;

size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

// Dense float32 array with an optional gradient buffer of the same length.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[i]; }
  size_t size() const { return data_.size(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  float& operator[](size_t i) { return data_[i]; }
  float operator[](size_t i) const { return data_[i]; }

  bool has_grad() const { return grad_.has_value(); }
  // Allocates a zeroed gradient buffer if none exists.
  std::span<float> EnsureGrad();
  std::span<float> grad() { return *grad_; }
  std::span<const float> grad() const { return *grad_; }
  void ZeroGrad();
  void DropGrad() { grad_.reset(); }

 private:
  Shape shape_;
  FloatBuffer data_;
  std::optional<FloatBuffer> grad_;
};

// A named, model-owned tensor. Identifiers are unique within a model and
// are the keys of the checkpoint format.
struct Parameter {
  std::string id;
  Tensor value;
  bool trainable = true;
};

}  // namespace prefiqa::nn

#endif  // PREFIQA_NN_TENSOR_HPP_
