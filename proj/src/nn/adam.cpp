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

#include "evnat/nn/adam.hpp"

#include <cmath>

#include "evnat/simd/kernels.hpp"

namespace evnat::nn {

template <typename T>
AdamT<T>::AdamT(std::vector<ValuePtrT<T>> params, AdamConfig<T> cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p->value.shape);
    v_.emplace_back(p->value.shape);
  }
}

template <typename T>
void AdamT<T>::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), t_);
  const double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), t_);
  const T inv_bc1 = static_cast<T>(1.0 / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ValueT<T>& p = *params_[i];
    p.ensure_grad();  // untouched grads act as zeros
    const std::size_t n = p.value.numel();
    if constexpr (std::is_same_v<T, float>) {
      simd::adam_update(p.value.data.data(), p.grad.data.data(), m_[i].data.data(),
                        v_[i].data.data(), n, cfg_.lr, cfg_.beta1, cfg_.beta2,
                        cfg_.eps, inv_bc1, inv_bc2);
    } else {
      const T omb1 = T(1) - cfg_.beta1;
      const T omb2 = T(1) - cfg_.beta2;
      for (std::size_t j = 0; j < n; ++j) {
        const T g = p.grad.data[j];
        m_[i].data[j] = cfg_.beta1 * m_[i].data[j] + omb1 * g;
        v_[i].data[j] = cfg_.beta2 * v_[i].data[j] + omb2 * (g * g);
        const T m_hat = m_[i].data[j] * inv_bc1;
        const T v_hat = v_[i].data[j] * inv_bc2;
        p.value.data[j] -= cfg_.lr * (m_hat / (std::sqrt(v_hat) + cfg_.eps));
      }
    }
  }
}

template <typename T>
void AdamT<T>::zero_grad() {
  for (const auto& p : params_) p->zero_grad();
}

template class AdamT<float>;
template class AdamT<double>;

}  // namespace evnat::nn
