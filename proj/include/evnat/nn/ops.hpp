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

#include <vector>

#include "evnat/core/rng.hpp"
#include "evnat/nn/autodiff.hpp"

namespace evnat::nn {

/// Convolutions ship two interchangeable engines: the straightforward
/// loop-nest reference and an im2col+gemm path that rides the SIMD kernels.
/// Both produce bitwise-identical forward results; tests compare them and an
/// independent oracle.
enum class ConvEngine { Direct, Im2col };
ConvEngine conv_engine();
void set_conv_engine(ConvEngine engine);

enum class Mode { Train, Eval };

/// Per-channel running statistics owned by a batch-norm layer.
template <typename T>
struct BnStateT {
  TensorT<T> running_mean;  // shape [C]
  TensorT<T> running_var;   // shape [C], initialized to 1
};

template <typename T>
ValuePtrT<T> constant(TapeT<T>& tape, TensorT<T> value);

/// Cross-correlation, weight [O,C,kh,kw], bias [O], zero padding.
template <typename T>
ValuePtrT<T> conv2d(TapeT<T>& tape, const ValuePtrT<T>& x, const ValuePtrT<T>& w,
                    const ValuePtrT<T>& b, int stride, int padding);

/// Fractionally-strided convolution, weight [Cin,Cout,kh,kw]. Defined as the
/// adjoint of conv2d: forward equals conv2d's input-backward for the same
/// stride/padding, so <conv2d(x,w), y> == <x, conv_transpose2d(y,w)>.
template <typename T>
ValuePtrT<T> conv_transpose2d(TapeT<T>& tape, const ValuePtrT<T>& x,
                              const ValuePtrT<T>& w, const ValuePtrT<T>& b,
                              int stride, int padding);

/// Train mode normalizes by batch statistics and folds them into the running
/// estimates (PyTorch momentum convention: run = (1-m)*run + m*batch, with
/// the unbiased variance entering the running estimate). Eval mode uses the
/// running statistics.
template <typename T>
ValuePtrT<T> batch_norm(TapeT<T>& tape, const ValuePtrT<T>& x,
                        const ValuePtrT<T>& gamma, const ValuePtrT<T>& beta,
                        BnStateT<T>& state, Mode mode, T momentum, T eps);

/// Derivative at exactly 0 is the slope.
template <typename T>
ValuePtrT<T> leaky_relu(TapeT<T>& tape, const ValuePtrT<T>& x, T slope);
template <typename T>
ValuePtrT<T> relu(TapeT<T>& tape, const ValuePtrT<T>& x);
template <typename T>
ValuePtrT<T> tanh_act(TapeT<T>& tape, const ValuePtrT<T>& x);
template <typename T>
ValuePtrT<T> sigmoid_act(TapeT<T>& tape, const ValuePtrT<T>& x);

/// Max pooling; backward routes to the argmax, ties broken to the first
/// index in row-major window order.
template <typename T>
ValuePtrT<T> max_pool2d(TapeT<T>& tape, const ValuePtrT<T>& x, int k, int stride);

/// Train mode zeroes with probability p and scales survivors by 1/(1-p);
/// eval mode is the identity. p in [0,1).
template <typename T>
ValuePtrT<T> dropout(TapeT<T>& tape, const ValuePtrT<T>& x, T p, CounterRng& rng,
                     Mode mode);

template <typename T>
ValuePtrT<T> concat_channels(TapeT<T>& tape, const ValuePtrT<T>& a,
                             const ValuePtrT<T>& b);

template <typename T>
ValuePtrT<T> reshape(TapeT<T>& tape, const ValuePtrT<T>& x, Shape shape);

template <typename T>
ValuePtrT<T> add(TapeT<T>& tape, const ValuePtrT<T>& a, const ValuePtrT<T>& b);

template <typename T>
ValuePtrT<T> scale_by(TapeT<T>& tape, const ValuePtrT<T>& x, T factor);

template <typename T>
ValuePtrT<T> sum_all(TapeT<T>& tape, const ValuePtrT<T>& x);

/// Mean-reduced binary cross-entropy; predictions are clamped to
/// [1e-7, 1-1e-7] and the clamp has zero gradient outside that band.
template <typename T>
ValuePtrT<T> bce_loss(TapeT<T>& tape, const ValuePtrT<T>& pred,
                      const TensorT<T>& target);
template <typename T>
ValuePtrT<T> bce_loss(TapeT<T>& tape, const ValuePtrT<T>& pred, T target_fill);

/// Mean absolute difference.
template <typename T>
ValuePtrT<T> l1_loss(TapeT<T>& tape, const ValuePtrT<T>& a, const ValuePtrT<T>& b);

/// Mean over the batch of -log softmax(logits)[label]; logits shape [N,K].
template <typename T>
ValuePtrT<T> softmax_cross_entropy(TapeT<T>& tape, const ValuePtrT<T>& logits,
                                   const std::vector<int>& labels);

/// Row-wise softmax of [N,K] logits, plain tensor math (no graph).
template <typename T>
TensorT<T> softmax_rows(const TensorT<T>& logits);

}  // namespace evnat::nn
