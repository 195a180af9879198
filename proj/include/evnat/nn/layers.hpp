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

#include <string>
#include <vector>

#include "evnat/core/rng.hpp"
#include "evnat/io/checkpoint.hpp"
#include "evnat/nn/ops.hpp"

namespace evnat::nn {

template <typename T>
TensorT<T> normal_init(Shape shape, T mean, T stddev, CounterRng& rng) {
  TensorT<T> t(shape);
  for (auto& v : t.data) {
    v = mean + stddev * static_cast<T>(rng.next_normal());
  }
  return t;
}

template <typename T>
struct Conv2dLayerT {
  ValuePtrT<T> w, b;
  int stride = 1;
  int padding = 0;

  static Conv2dLayerT make(int in_ch, int out_ch, int k, int stride, int padding,
                           T weight_std, CounterRng& rng) {
    Conv2dLayerT layer;
    layer.w = make_param(normal_init<T>(Shape::of4(out_ch, in_ch, k, k), T(0),
                                        weight_std, rng));
    layer.b = make_param(TensorT<T>(Shape::of1(out_ch)));
    layer.stride = stride;
    layer.padding = padding;
    return layer;
  }

  ValuePtrT<T> operator()(TapeT<T>& tape, const ValuePtrT<T>& x) const {
    return conv2d(tape, x, w, b, stride, padding);
  }
};

template <typename T>
struct ConvTranspose2dLayerT {
  ValuePtrT<T> w, b;  // w: [in_ch, out_ch, k, k]
  int stride = 1;
  int padding = 0;

  static ConvTranspose2dLayerT make(int in_ch, int out_ch, int k, int stride,
                                    int padding, T weight_std, CounterRng& rng) {
    ConvTranspose2dLayerT layer;
    layer.w = make_param(normal_init<T>(Shape::of4(in_ch, out_ch, k, k), T(0),
                                        weight_std, rng));
    layer.b = make_param(TensorT<T>(Shape::of1(out_ch)));
    layer.stride = stride;
    layer.padding = padding;
    return layer;
  }

  ValuePtrT<T> operator()(TapeT<T>& tape, const ValuePtrT<T>& x) const {
    return conv_transpose2d(tape, x, w, b, stride, padding);
  }
};

template <typename T>
struct BatchNormLayerT {
  ValuePtrT<T> gamma, beta;
  BnStateT<T> state;
  T momentum = T(0.1);
  T eps = T(1e-5);

  /// gamma ~ N(1, gamma_std) when gamma_std > 0, otherwise exactly 1.
  static BatchNormLayerT make(int channels, T gamma_std, CounterRng& rng) {
    BatchNormLayerT layer;
    TensorT<T> g(Shape::of1(channels), T(1));
    if (gamma_std > T(0)) {
      for (auto& v : g.data) v = T(1) + gamma_std * static_cast<T>(rng.next_normal());
    }
    layer.gamma = make_param(std::move(g));
    layer.beta = make_param(TensorT<T>(Shape::of1(channels)));
    layer.state.running_mean = TensorT<T>(Shape::of1(channels));
    layer.state.running_var = TensorT<T>(Shape::of1(channels), T(1));
    return layer;
  }

  ValuePtrT<T> operator()(TapeT<T>& tape, const ValuePtrT<T>& x, Mode mode) {
    return batch_norm(tape, x, gamma, beta, state, mode, momentum, eps);
  }
};

// --- checkpoint helpers -----------------------------------------------------

template <typename T>
NamedTensor to_named(const std::string& name, const TensorT<T>& t) {
  NamedTensor nt;
  nt.name = name;
  for (int i = 0; i < t.shape.rank; ++i) {
    nt.dims.push_back(static_cast<std::uint32_t>(t.shape.dims[i]));
  }
  nt.values.reserve(t.data.size());
  for (const T v : t.data) nt.values.push_back(static_cast<float>(v));
  return nt;
}

template <typename T>
void from_named(const NamedTensor& nt, TensorT<T>& t) {
  if (nt.values.size() != t.data.size()) {
    raise(ErrorCode::ShapeMismatch, "checkpoint tensor '" + nt.name +
                                        "' has wrong element count");
  }
  for (std::size_t i = 0; i < nt.values.size(); ++i) {
    t.data[i] = static_cast<T>(nt.values[i]);
  }
}

/// Pulls tensors by name from a decoded checkpoint, raising on absence.
class StateDictReader {
 public:
  explicit StateDictReader(const std::vector<NamedTensor>& tensors)
      : tensors_(tensors) {}

  const NamedTensor& get(const std::string& name) const {
    for (const NamedTensor& t : tensors_) {
      if (t.name == name) return t;
    }
    raise(ErrorCode::ShapeMismatch, "checkpoint lacks tensor '" + name + "'");
  }

 private:
  const std::vector<NamedTensor>& tensors_;
};

}  // namespace evnat::nn
