// Copyright 2026 The evnat authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "evnat/nn/autodiff.hpp"

namespace evnat::nn {

template <typename T>
struct AdamConfig {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

/// Adam with bias correction:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
/// Per-parameter moment tensors are kept in registration order; a parameter
/// whose grad was never touched this step contributes g = 0.
template <typename T>
class AdamT {
 public:
  AdamT(std::vector<ValuePtrT<T>> params, AdamConfig<T> cfg);

  void step();
  void zero_grad();
  std::int64_t step_count() const { return t_; }
  const std::vector<ValuePtrT<T>>& params() const { return params_; }
  const TensorT<T>& first_moment(std::size_t i) const { return m_[i]; }
  const TensorT<T>& second_moment(std::size_t i) const { return v_[i]; }

 private:
  std::vector<ValuePtrT<T>> params_;
  std::vector<TensorT<T>> m_, v_;
  AdamConfig<T> cfg_;
  std::int64_t t_ = 0;
};

using Adam = AdamT<float>;

}  // namespace evnat::nn
