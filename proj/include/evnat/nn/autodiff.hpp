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

#include <functional>
#include <memory>
#include <vector>

#include "evnat/nn/tensor.hpp"

namespace evnat::nn {

/// One node of the recorded computation: the forward value, the lazily
/// allocated gradient, and the closure that pushes this node's gradient into
/// its parents. Parameters are nodes that live outside any tape.
template <typename T>
class ValueT {
 public:
  TensorT<T> value;
  TensorT<T> grad;  // empty until touched by backward
  bool requires_grad = false;
  std::function<void()> backprop;

  bool has_grad() const { return !grad.empty(); }

  void ensure_grad() {
    if (grad.empty()) grad = TensorT<T>(value.shape);
  }

  void zero_grad() {
    if (!grad.empty()) std::fill(grad.data.begin(), grad.data.end(), T(0));
  }
};

template <typename T>
using ValuePtrT = std::shared_ptr<ValueT<T>>;

/// Trainable leaf; participates in graphs from any tape.
template <typename T>
ValuePtrT<T> make_param(TensorT<T> value) {
  auto v = std::make_shared<ValueT<T>>();
  v->value = std::move(value);
  v->requires_grad = true;
  return v;
}

/// Records operations in creation order (which is a topological order by
/// construction: inputs exist before the node that consumes them). One
/// backward pass per tape; a second pass or further recording raises
/// GraphConsumed. A tape built with grad_enabled=false records no closures
/// and is the cheap path for evaluation-only forwards.
template <typename T>
class TapeT {
 public:
  explicit TapeT(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }
  bool consumed() const { return consumed_; }

  /// Ops create the node first, then (when grad_enabled) attach the
  /// backprop closure capturing the returned pointer.
  ValuePtrT<T> record(TensorT<T> value) {
    if (consumed_) {
      raise(ErrorCode::GraphConsumed, "cannot record onto a consumed graph");
    }
    auto v = std::make_shared<ValueT<T>>();
    v->value = std::move(value);
    v->requires_grad = grad_enabled_;
    nodes_.push_back(v);
    return v;
  }

  /// Reverse-mode accumulation from a scalar loss. Visits each recorded node
  /// exactly once, newest first; gradients of off-path nodes stay empty.
  void backward(const ValuePtrT<T>& loss) {
    if (!grad_enabled_) {
      raise(ErrorCode::GraphConsumed, "tape was recorded with gradients disabled");
    }
    if (consumed_) {
      raise(ErrorCode::GraphConsumed,
            "backward already ran on this graph; re-record before differentiating again");
    }
    if (loss->value.numel() != 1) {
      raise(ErrorCode::ShapeMismatch, "backward requires a scalar loss");
    }
    consumed_ = true;
    loss->ensure_grad();
    loss->grad.data[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      ValueT<T>& node = **it;
      if (!node.has_grad() || !node.backprop) continue;
      node.backprop();
    }
  }

 private:
  std::vector<ValuePtrT<T>> nodes_;
  bool grad_enabled_ = true;
  bool consumed_ = false;
};

/// Adds src into dst->grad, allocating on first touch.
template <typename T>
void accumulate_grad(const ValuePtrT<T>& dst, const TensorT<T>& src) {
  dst->ensure_grad();
  for (std::size_t i = 0; i < src.data.size(); ++i) dst->grad.data[i] += src.data[i];
}

using Value = ValueT<float>;
using ValuePtr = ValuePtrT<float>;
using Tape = TapeT<float>;

}  // namespace evnat::nn
