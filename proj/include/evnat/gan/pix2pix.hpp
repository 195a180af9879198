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
#include <string>
#include <vector>

#include "evnat/io/paired_dataset.hpp"
#include "evnat/nn/layers.hpp"

namespace evnat::gan {

struct GeneratorConfig {
  int input_channels = 1;
  int output_channels = 3;
  int base_filters = 32;
  int depth = 3;  // encoder/decoder levels; input side must divide 2^depth
  float dropout_p = 0.5f;
};

struct DiscriminatorConfig {
  int input_channels = 4;  // source + target, concatenated
  int base_filters = 32;
  int num_layers = 3;  // stride-2 blocks; patch grid side = side / 2^num_layers
};

struct GanTrainConfig {
  int epochs = 30;
  int batch_size = 16;
  float lambda_l1 = 100.0f;
  std::uint64_t seed = 0;
  int checkpoint_interval = 10;
  float lr = 2e-4f;
  float beta1 = 0.5f;
  float beta2 = 0.999f;
};

/// U-Net: stride-2 encoder convs (filters doubling, capped at 8x base),
/// mirrored stride-2 transposed convs with skip concatenation, dropout in
/// the first decoder levels (the noise source z), final tanh.
template <typename T>
struct UnetGeneratorT {
  GeneratorConfig cfg;
  std::vector<nn::Conv2dLayerT<T>> enc;
  std::vector<nn::BatchNormLayerT<T>> enc_bn;  // levels 1..depth-1
  std::vector<nn::ConvTranspose2dLayerT<T>> dec;
  std::vector<nn::BatchNormLayerT<T>> dec_bn;
  nn::ConvTranspose2dLayerT<T> out_layer;

  nn::ValuePtrT<T> forward(nn::TapeT<T>& tape, const nn::ValuePtrT<T>& x,
                           nn::Mode bn_mode, bool use_dropout, CounterRng& rng);
  std::vector<nn::ValuePtrT<T>> parameters() const;
  std::vector<NamedTensor> state_dict() const;
  void load_state_dict(const std::vector<NamedTensor>& tensors);
};

/// PatchGAN: stride-2 conv blocks (batch norm from the second block on),
/// then a 1-channel stride-1 conv and sigmoid, yielding an h' x w' grid of
/// per-patch probabilities.
template <typename T>
struct PatchDiscriminatorT {
  DiscriminatorConfig cfg;
  std::vector<nn::Conv2dLayerT<T>> convs;
  std::vector<nn::BatchNormLayerT<T>> bns;  // blocks 1..num_layers-1
  nn::Conv2dLayerT<T> final_conv;

  nn::ValuePtrT<T> forward(nn::TapeT<T>& tape, const nn::ValuePtrT<T>& source,
                           const nn::ValuePtrT<T>& target, nn::Mode bn_mode);
  std::vector<nn::ValuePtrT<T>> parameters() const;
  std::vector<NamedTensor> state_dict() const;
  void load_state_dict(const std::vector<NamedTensor>& tensors);
};

template <typename T>
UnetGeneratorT<T> build_generator(const GeneratorConfig& cfg, std::uint64_t seed);
template <typename T>
PatchDiscriminatorT<T> build_discriminator(const DiscriminatorConfig& cfg,
                                           std::uint64_t seed);

/// bce(d_real, 1) + bce(d_fake, 0), each mean-reduced over the patch grid.
/// Descending this loss ascends the discriminator's two value-function terms.
template <typename T>
nn::ValuePtrT<T> d_loss_from_probs(nn::TapeT<T>& tape,
                                   const nn::ValuePtrT<T>& d_real,
                                   const nn::ValuePtrT<T>& d_fake);

/// Non-saturating generator surrogate bce(d_fake, 1) plus lambda * L1.
template <typename T>
nn::ValuePtrT<T> g_loss_from_probs(nn::TapeT<T>& tape,
                                   const nn::ValuePtrT<T>& d_fake,
                                   const nn::ValuePtrT<T>& y_fake,
                                   const nn::ValuePtrT<T>& y_real, T lambda_l1);

struct EpochLog {
  int epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double val_l1 = 0.0;
  double wall_seconds = 0.0;  // operational metadata, excluded from
                              // determinism comparisons
};

struct TrainResult {
  std::vector<NamedTensor> generator;
  std::vector<NamedTensor> discriminator;
  std::vector<EpochLog> log;
};

/// Sources may be regenerated between epochs through the refresh hook
/// (used for per-epoch spike re-sampling; off by default).
using EpochRefresh = std::function<void(int epoch, std::vector<PairedSample>&)>;

/// Alternating one-discriminator-step / one-generator-step training over
/// shuffled batches. Deterministic for a given seed. When out_dir is
/// non-empty, checkpoints land there atomically every checkpoint_interval
/// epochs and at the end.
TrainResult train(std::vector<PairedSample> train_pairs,
                  const std::vector<PairedSample>& val_pairs,
                  const GeneratorConfig& gcfg, const DiscriminatorConfig& dcfg,
                  const GanTrainConfig& tcfg, const std::string& out_dir = "",
                  const EpochRefresh& refresh = nullptr);

/// Runs the source through the generator in eval mode and rescales the tanh
/// output to 8-bit RGB. Dropout stays off unless use_dropout is set
/// (stochastic outputs; the seed picks the noise draw).
ImageBuffer generate(UnetGeneratorT<float>& generator, const ImageBuffer& source,
                     bool use_dropout = false, std::uint64_t noise_seed = 0);

/// Mean per-epoch validation metric used in the log: mean absolute
/// difference in tanh space between generated and target images.
double validation_l1(UnetGeneratorT<float>& generator,
                     const std::vector<PairedSample>& pairs);

// normalization helpers ([0,255] <-> [-1,1]); round-trip is lossless
nn::Tensor images_to_tanh_batch(const std::vector<const ImageBuffer*>& images,
                                int channels);
ImageBuffer tanh_slice_to_image(const nn::Tensor& batch, int index);

}  // namespace evnat::gan
