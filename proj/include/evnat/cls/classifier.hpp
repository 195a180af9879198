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

#include <array>
#include <vector>

#include "evnat/io/cifar.hpp"
#include "evnat/nn/layers.hpp"

namespace evnat::cls {

struct AugmentConfig {
  bool flip = true;
  int shift_pixels = 2;
};

/// VGG-derived benchmark instrument: exactly 6 conv layers in 3 blocks of 2,
/// each block closed by one 2x2 max pool and one dropout.
struct ClassifierConfig {
  int input_channels = 3;
  int input_side = 32;  // must divide by 8 (three pools)
  int num_classes = 3;
  std::array<int, 3> conv_filters{32, 64, 128};
  std::array<float, 3> dropout_ps{0.25f, 0.25f, 0.25f};
  float leaky_slope = 0.1f;
  AugmentConfig augmentation;
  float lr = 1e-3f;
  int batch_size = 32;
};

template <typename T>
struct VggClassifierT {
  ClassifierConfig cfg;
  std::vector<nn::Conv2dLayerT<T>> convs;     // 6
  std::vector<nn::BatchNormLayerT<T>> bns;    // 6
  nn::Conv2dLayerT<T> dense;                  // 1x1 conv over flattened dims

  /// x is [N, C, side, side] in [0,1]; returns [N, num_classes] logits.
  nn::ValuePtrT<T> forward(nn::TapeT<T>& tape, const nn::ValuePtrT<T>& x,
                           nn::Mode mode, CounterRng& rng);
  std::vector<nn::ValuePtrT<T>> parameters() const;
  std::size_t parameter_count() const;
  std::vector<NamedTensor> state_dict() const;
  void load_state_dict(const std::vector<NamedTensor>& tensors);
};

template <typename T>
VggClassifierT<T> build_classifier(const ClassifierConfig& cfg, std::uint64_t seed);

// augmentation primitives (exposed for direct testing)
ImageBuffer flip_horizontal(const ImageBuffer& image);
/// Content moves by (dx, dy); vacated pixels fill by reflection.
ImageBuffer shift_reflect(const ImageBuffer& image, int dx, int dy);

/// Random horizontal flip (p = 0.5) and translation up to +-shift_pixels.
ImageBuffer augment(const ImageBuffer& image, const AugmentConfig& cfg,
                    CounterRng& rng);
ImageBuffer augment(const ImageBuffer& image, const AugmentConfig& cfg,
                    std::uint64_t seed);

struct ClassifierEpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double wall_seconds = 0.0;
};

struct ClassifierTrainResult {
  std::vector<NamedTensor> state;
  std::vector<ClassifierEpochLog> log;
};

ClassifierTrainResult train_classifier(const std::vector<LabeledImage>& data,
                                       const ClassifierConfig& cfg, int epochs,
                                       std::uint64_t seed);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<int>> confusion;  // [true][predicted]
  std::vector<int> predictions;
};

/// Argmax accuracy in eval mode (dropout off, running batch-norm stats).
EvalResult evaluate(VggClassifierT<float>& classifier,
                    const std::vector<LabeledImage>& data);

}  // namespace evnat::cls
