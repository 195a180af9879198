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

#include "evnat/gan/pix2pix.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include "evnat/nn/adam.hpp"

namespace evnat::gan {

using nn::Mode;
using nn::Shape;
using nn::TapeT;
using nn::TensorT;
using nn::ValuePtrT;

namespace {

constexpr float kWeightStd = 0.02f;
constexpr float kBnGammaStd = 0.02f;
constexpr float kEncoderSlope = 0.2f;

int filters_at(int base, int level) {
  return base * std::min(1 << level, 8);
}

template <typename T>
void append_bn(std::vector<NamedTensor>& out, const std::string& prefix,
               const nn::BatchNormLayerT<T>& bn) {
  out.push_back(nn::to_named(prefix + ".gamma", bn.gamma->value));
  out.push_back(nn::to_named(prefix + ".beta", bn.beta->value));
  out.push_back(nn::to_named(prefix + ".running_mean", bn.state.running_mean));
  out.push_back(nn::to_named(prefix + ".running_var", bn.state.running_var));
}

template <typename T>
void read_bn(const nn::StateDictReader& reader, const std::string& prefix,
             nn::BatchNormLayerT<T>& bn) {
  nn::from_named(reader.get(prefix + ".gamma"), bn.gamma->value);
  nn::from_named(reader.get(prefix + ".beta"), bn.beta->value);
  nn::from_named(reader.get(prefix + ".running_mean"), bn.state.running_mean);
  nn::from_named(reader.get(prefix + ".running_var"), bn.state.running_var);
}

}  // namespace

// ---------------------------------------------------------------------------
// generator
// ---------------------------------------------------------------------------

template <typename T>
UnetGeneratorT<T> build_generator(const GeneratorConfig& cfg, std::uint64_t seed) {
  if (cfg.depth < 2) raise(ErrorCode::BadConfig, "generator depth must be >= 2");
  if (cfg.base_filters < 1 || cfg.input_channels < 1 || cfg.output_channels < 1) {
    raise(ErrorCode::BadConfig, "generator channel counts must be positive");
  }
  if (!(cfg.dropout_p >= 0.0f && cfg.dropout_p < 1.0f)) {
    raise(ErrorCode::BadConfig, "dropout_p must lie in [0,1)");
  }
  CounterRng rng(seed);
  UnetGeneratorT<T> g;
  g.cfg = cfg;
  const T wstd = static_cast<T>(kWeightStd);
  for (int i = 0; i < cfg.depth; ++i) {
    const int in_ch = i == 0 ? cfg.input_channels : filters_at(cfg.base_filters, i - 1);
    const int out_ch = filters_at(cfg.base_filters, i);
    g.enc.push_back(nn::Conv2dLayerT<T>::make(in_ch, out_ch, 4, 2, 1, wstd, rng));
    if (i > 0) {
      g.enc_bn.push_back(
          nn::BatchNormLayerT<T>::make(out_ch, static_cast<T>(kBnGammaStd), rng));
    }
  }
  for (int j = cfg.depth - 1; j >= 1; --j) {
    const int in_ch = j == cfg.depth - 1 ? filters_at(cfg.base_filters, j)
                                         : 2 * filters_at(cfg.base_filters, j);
    const int out_ch = filters_at(cfg.base_filters, j - 1);
    g.dec.push_back(
        nn::ConvTranspose2dLayerT<T>::make(in_ch, out_ch, 4, 2, 1, wstd, rng));
    g.dec_bn.push_back(
        nn::BatchNormLayerT<T>::make(out_ch, static_cast<T>(kBnGammaStd), rng));
  }
  g.out_layer = nn::ConvTranspose2dLayerT<T>::make(
      2 * filters_at(cfg.base_filters, 0), cfg.output_channels, 4, 2, 1, wstd, rng);
  return g;
}

template <typename T>
ValuePtrT<T> UnetGeneratorT<T>::forward(TapeT<T>& tape, const ValuePtrT<T>& x,
                                        Mode bn_mode, bool use_dropout,
                                        CounterRng& rng) {
  const Shape xs = x->value.shape;
  if (xs.c() != cfg.input_channels) {
    raise(ErrorCode::ShapeMismatch, "generator input channel mismatch");
  }
  const int div = 1 << cfg.depth;
  if (xs.h() % div != 0 || xs.w() % div != 0) {
    raise(ErrorCode::IndivisibleSpatialSize,
          "input side " + std::to_string(xs.h()) + "x" + std::to_string(xs.w()) +
              " not divisible by 2^" + std::to_string(cfg.depth));
  }

  std::vector<ValuePtrT<T>> skips;
  ValuePtrT<T> h = x;
  for (int i = 0; i < cfg.depth; ++i) {
    h = enc[i](tape, h);
    if (i > 0) h = enc_bn[i - 1](tape, h, bn_mode);
    h = nn::leaky_relu(tape, h, static_cast<T>(kEncoderSlope));
    skips.push_back(h);
  }

  const int num_dropout = std::min(3, cfg.depth - 1);
  ValuePtrT<T> y = skips[cfg.depth - 1];
  for (int j = cfg.depth - 1; j >= 1; --j) {
    const int idx = cfg.depth - 1 - j;
    y = dec[idx](tape, y);
    y = dec_bn[idx](tape, y, bn_mode);
    if (idx < num_dropout) {
      y = nn::dropout(tape, y, static_cast<T>(cfg.dropout_p), rng,
                      use_dropout ? Mode::Train : Mode::Eval);
    }
    y = nn::relu(tape, y);
    y = nn::concat_channels(tape, y, skips[j - 1]);
  }
  y = out_layer(tape, y);
  return nn::tanh_act(tape, y);
}

template <typename T>
std::vector<ValuePtrT<T>> UnetGeneratorT<T>::parameters() const {
  std::vector<ValuePtrT<T>> params;
  for (const auto& l : enc) {
    params.push_back(l.w);
    params.push_back(l.b);
  }
  for (const auto& bn : enc_bn) {
    params.push_back(bn.gamma);
    params.push_back(bn.beta);
  }
  for (const auto& l : dec) {
    params.push_back(l.w);
    params.push_back(l.b);
  }
  for (const auto& bn : dec_bn) {
    params.push_back(bn.gamma);
    params.push_back(bn.beta);
  }
  params.push_back(out_layer.w);
  params.push_back(out_layer.b);
  return params;
}

template <typename T>
std::vector<NamedTensor> UnetGeneratorT<T>::state_dict() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < enc.size(); ++i) {
    out.push_back(nn::to_named("enc" + std::to_string(i) + ".w", enc[i].w->value));
    out.push_back(nn::to_named("enc" + std::to_string(i) + ".b", enc[i].b->value));
  }
  for (std::size_t i = 0; i < enc_bn.size(); ++i) {
    append_bn(out, "enc_bn" + std::to_string(i + 1), enc_bn[i]);
  }
  for (std::size_t i = 0; i < dec.size(); ++i) {
    out.push_back(nn::to_named("dec" + std::to_string(i) + ".w", dec[i].w->value));
    out.push_back(nn::to_named("dec" + std::to_string(i) + ".b", dec[i].b->value));
  }
  for (std::size_t i = 0; i < dec_bn.size(); ++i) {
    append_bn(out, "dec_bn" + std::to_string(i), dec_bn[i]);
  }
  out.push_back(nn::to_named("out.w", out_layer.w->value));
  out.push_back(nn::to_named("out.b", out_layer.b->value));
  return out;
}

template <typename T>
void UnetGeneratorT<T>::load_state_dict(const std::vector<NamedTensor>& tensors) {
  nn::StateDictReader reader(tensors);
  for (std::size_t i = 0; i < enc.size(); ++i) {
    nn::from_named(reader.get("enc" + std::to_string(i) + ".w"), enc[i].w->value);
    nn::from_named(reader.get("enc" + std::to_string(i) + ".b"), enc[i].b->value);
  }
  for (std::size_t i = 0; i < enc_bn.size(); ++i) {
    read_bn(reader, "enc_bn" + std::to_string(i + 1), enc_bn[i]);
  }
  for (std::size_t i = 0; i < dec.size(); ++i) {
    nn::from_named(reader.get("dec" + std::to_string(i) + ".w"), dec[i].w->value);
    nn::from_named(reader.get("dec" + std::to_string(i) + ".b"), dec[i].b->value);
  }
  for (std::size_t i = 0; i < dec_bn.size(); ++i) {
    read_bn(reader, "dec_bn" + std::to_string(i), dec_bn[i]);
  }
  nn::from_named(reader.get("out.w"), out_layer.w->value);
  nn::from_named(reader.get("out.b"), out_layer.b->value);
}

// ---------------------------------------------------------------------------
// discriminator
// ---------------------------------------------------------------------------

template <typename T>
PatchDiscriminatorT<T> build_discriminator(const DiscriminatorConfig& cfg,
                                           std::uint64_t seed) {
  if (cfg.num_layers < 1) raise(ErrorCode::BadConfig, "discriminator needs >= 1 layer");
  if (cfg.base_filters < 1 || cfg.input_channels < 1) {
    raise(ErrorCode::BadConfig, "discriminator channel counts must be positive");
  }
  CounterRng rng(seed);
  PatchDiscriminatorT<T> d;
  d.cfg = cfg;
  const T wstd = static_cast<T>(kWeightStd);
  for (int i = 0; i < cfg.num_layers; ++i) {
    const int in_ch = i == 0 ? cfg.input_channels : filters_at(cfg.base_filters, i - 1);
    const int out_ch = filters_at(cfg.base_filters, i);
    d.convs.push_back(nn::Conv2dLayerT<T>::make(in_ch, out_ch, 4, 2, 1, wstd, rng));
    if (i > 0) {
      d.bns.push_back(
          nn::BatchNormLayerT<T>::make(out_ch, static_cast<T>(kBnGammaStd), rng));
    }
  }
  d.final_conv = nn::Conv2dLayerT<T>::make(
      filters_at(cfg.base_filters, cfg.num_layers - 1), 1, 3, 1, 1, wstd, rng);
  return d;
}

template <typename T>
ValuePtrT<T> PatchDiscriminatorT<T>::forward(TapeT<T>& tape,
                                             const ValuePtrT<T>& source,
                                             const ValuePtrT<T>& target,
                                             Mode bn_mode) {
  if (source->value.shape.c() + target->value.shape.c() != cfg.input_channels) {
    raise(ErrorCode::ShapeMismatch,
          "source+target channels must equal discriminator input channels");
  }
  ValuePtrT<T> h = nn::concat_channels(tape, source, target);
  for (int i = 0; i < cfg.num_layers; ++i) {
    if (h->value.shape.h() < 2 || h->value.shape.w() < 2) {
      raise(ErrorCode::SpatialCollapse,
            "patch grid collapses below 1x1 at layer " + std::to_string(i));
    }
    h = convs[i](tape, h);
    if (i > 0) h = bns[i - 1](tape, h, bn_mode);
    h = nn::leaky_relu(tape, h, static_cast<T>(kEncoderSlope));
  }
  h = final_conv(tape, h);
  return nn::sigmoid_act(tape, h);
}

template <typename T>
std::vector<ValuePtrT<T>> PatchDiscriminatorT<T>::parameters() const {
  std::vector<ValuePtrT<T>> params;
  for (const auto& l : convs) {
    params.push_back(l.w);
    params.push_back(l.b);
  }
  for (const auto& bn : bns) {
    params.push_back(bn.gamma);
    params.push_back(bn.beta);
  }
  params.push_back(final_conv.w);
  params.push_back(final_conv.b);
  return params;
}

template <typename T>
std::vector<NamedTensor> PatchDiscriminatorT<T>::state_dict() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    out.push_back(nn::to_named("conv" + std::to_string(i) + ".w", convs[i].w->value));
    out.push_back(nn::to_named("conv" + std::to_string(i) + ".b", convs[i].b->value));
  }
  for (std::size_t i = 0; i < bns.size(); ++i) {
    append_bn(out, "bn" + std::to_string(i + 1), bns[i]);
  }
  out.push_back(nn::to_named("final.w", final_conv.w->value));
  out.push_back(nn::to_named("final.b", final_conv.b->value));
  return out;
}

template <typename T>
void PatchDiscriminatorT<T>::load_state_dict(const std::vector<NamedTensor>& tensors) {
  nn::StateDictReader reader(tensors);
  for (std::size_t i = 0; i < convs.size(); ++i) {
    nn::from_named(reader.get("conv" + std::to_string(i) + ".w"), convs[i].w->value);
    nn::from_named(reader.get("conv" + std::to_string(i) + ".b"), convs[i].b->value);
  }
  for (std::size_t i = 0; i < bns.size(); ++i) {
    read_bn(reader, "bn" + std::to_string(i + 1), bns[i]);
  }
  nn::from_named(reader.get("final.w"), final_conv.w->value);
  nn::from_named(reader.get("final.b"), final_conv.b->value);
}

// ---------------------------------------------------------------------------
// losses
// ---------------------------------------------------------------------------

template <typename T>
ValuePtrT<T> d_loss_from_probs(TapeT<T>& tape, const ValuePtrT<T>& d_real,
                               const ValuePtrT<T>& d_fake) {
  auto real_term = nn::bce_loss(tape, d_real, T(1));
  auto fake_term = nn::bce_loss(tape, d_fake, T(0));
  return nn::add(tape, real_term, fake_term);
}

template <typename T>
ValuePtrT<T> g_loss_from_probs(TapeT<T>& tape, const ValuePtrT<T>& d_fake,
                               const ValuePtrT<T>& y_fake,
                               const ValuePtrT<T>& y_real, T lambda_l1) {
  auto adv = nn::bce_loss(tape, d_fake, T(1));
  auto rec = nn::l1_loss(tape, y_fake, y_real);
  return nn::add(tape, adv, nn::scale_by(tape, rec, lambda_l1));
}

// ---------------------------------------------------------------------------
// normalization helpers
// ---------------------------------------------------------------------------

nn::Tensor images_to_tanh_batch(const std::vector<const ImageBuffer*>& images,
                                int channels) {
  if (images.empty()) raise(ErrorCode::EmptyDataset, "empty batch");
  const int h = images[0]->height();
  const int w = images[0]->width();
  nn::Tensor batch(Shape::of4(static_cast<int>(images.size()), channels, h, w));
  for (std::size_t n = 0; n < images.size(); ++n) {
    const ImageBuffer& img = *images[n];
    if (img.height() != h || img.width() != w || img.channels() != channels) {
      raise(ErrorCode::SizeMismatch, "batch images must share geometry");
    }
    for (int c = 0; c < channels; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          batch.at(static_cast<int>(n), c, y, x) = img.value(y, x, c) * 2.0f - 1.0f;
        }
      }
    }
  }
  return batch;
}

ImageBuffer tanh_slice_to_image(const nn::Tensor& batch, int index) {
  const Shape s = batch.shape;
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(s.h()) * s.w() * s.c());
  for (int c = 0; c < s.c(); ++c) {
    for (int y = 0; y < s.h(); ++y) {
      for (int x = 0; x < s.w(); ++x) {
        const float v = std::clamp(batch.at(index, c, y, x), -1.0f, 1.0f);
        pixels[(static_cast<std::size_t>(y) * s.w() + x) * s.c() + c] =
            static_cast<std::uint8_t>(std::lround((v + 1.0f) * 0.5f * 255.0f));
      }
    }
  }
  return ImageBuffer::u8(s.h(), s.w(), s.c(), std::move(pixels));
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

namespace {

void check_pair_sizes(const std::vector<PairedSample>& pairs, int h, int w) {
  for (const PairedSample& p : pairs) {
    if (p.source.height() != h || p.source.width() != w ||
        p.target.height() != h || p.target.width() != w) {
      raise(ErrorCode::SizeMismatch, "pair " + p.id + " has inconsistent geometry");
    }
  }
}

}  // namespace

double validation_l1(UnetGeneratorT<float>& generator,
                     const std::vector<PairedSample>& pairs) {
  if (pairs.empty()) return 0.0;
  CounterRng unused(0);
  double total = 0.0;
  std::size_t count = 0;
  for (const PairedSample& p : pairs) {
    TapeT<float> tape(false);
    nn::Tensor x = images_to_tanh_batch({&p.source}, 1);
    auto xv = nn::constant(tape, std::move(x));
    auto fake = generator.forward(tape, xv, Mode::Eval, false, unused);
    nn::Tensor y = images_to_tanh_batch({&p.target}, 3);
    for (std::size_t i = 0; i < y.numel(); ++i) {
      total += std::abs(static_cast<double>(fake->value.data[i]) - y.data[i]);
    }
    count += y.numel();
  }
  return total / static_cast<double>(count);
}

TrainResult train(std::vector<PairedSample> train_pairs,
                  const std::vector<PairedSample>& val_pairs,
                  const GeneratorConfig& gcfg, const DiscriminatorConfig& dcfg,
                  const GanTrainConfig& tcfg, const std::string& out_dir,
                  const EpochRefresh& refresh) {
  if (train_pairs.empty()) raise(ErrorCode::EmptyDataset, "no training pairs");
  if (tcfg.batch_size < 1) raise(ErrorCode::BadConfig, "batch_size must be >= 1");
  if (tcfg.lambda_l1 < 0.0f) raise(ErrorCode::BadConfig, "lambda_l1 must be >= 0");
  const int h = train_pairs[0].source.height();
  const int w = train_pairs[0].source.width();
  check_pair_sizes(train_pairs, h, w);
  check_pair_sizes(val_pairs, h, w);

  CounterRng root(tcfg.seed);
  auto G = build_generator<float>(gcfg, root.fork(1).next_u64());
  auto D = build_discriminator<float>(dcfg, root.fork(2).next_u64());
  CounterRng shuffle_rng = root.fork(3);
  CounterRng dropout_rng = root.fork(4);

  nn::Adam opt_g(G.parameters(), {tcfg.lr, tcfg.beta1, tcfg.beta2, 1e-8f});
  nn::Adam opt_d(D.parameters(), {tcfg.lr, tcfg.beta1, tcfg.beta2, 1e-8f});

  TrainResult result;
  std::vector<std::size_t> order(train_pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (refresh) {
      refresh(epoch, train_pairs);
      check_pair_sizes(train_pairs, h, w);
    }
    // Fisher-Yates on the sample order
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    }

    double epoch_d = 0.0, epoch_g = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
      std::vector<const ImageBuffer*> sources, targets;
      for (std::size_t i = start; i < end; ++i) {
        sources.push_back(&train_pairs[order[i]].source);
        targets.push_back(&train_pairs[order[i]].target);
      }
      nn::Tensor x = images_to_tanh_batch(sources, 1);
      nn::Tensor y = images_to_tanh_batch(targets, 3);

      // generator forward (dropout = the paper's noise z)
      TapeT<float> tape_g(true);
      auto xg = nn::constant(tape_g, x);
      auto yg = nn::constant(tape_g, y);
      auto fake = G.forward(tape_g, xg, Mode::Train, true, dropout_rng);

      // discriminator step on the detached fake
      TapeT<float> tape_d(true);
      auto xd = nn::constant(tape_d, std::move(x));
      auto yd = nn::constant(tape_d, std::move(y));
      auto fd = nn::constant(tape_d, fake->value);
      auto d_real = D.forward(tape_d, xd, yd, Mode::Train);
      auto d_fake = D.forward(tape_d, xd, fd, Mode::Train);
      auto ld = d_loss_from_probs(tape_d, d_real, d_fake);
      opt_d.zero_grad();
      opt_g.zero_grad();
      tape_d.backward(ld);
      opt_d.step();

      // generator step against the updated discriminator
      auto d_fake2 = D.forward(tape_g, xg, fake, Mode::Train);
      auto lg = g_loss_from_probs(tape_g, d_fake2, fake, yg, tcfg.lambda_l1);
      opt_g.zero_grad();
      opt_d.zero_grad();
      tape_g.backward(lg);
      opt_g.step();

      epoch_d += ld->value.data[0];
      epoch_g += lg->value.data[0];
      ++batches;
    }

    EpochLog log;
    log.epoch = epoch;
    log.d_loss = epoch_d / batches;
    log.g_loss = epoch_g / batches;
    log.val_l1 = validation_l1(G, val_pairs);
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(log);

    if (!out_dir.empty() && tcfg.checkpoint_interval > 0 &&
        (epoch % tcfg.checkpoint_interval == 0 || epoch == tcfg.epochs)) {
      const auto path = std::filesystem::path(out_dir) /
                        ("generator_epoch_" + std::to_string(epoch) + ".evn1");
      write_checkpoint_file(path.string(), G.state_dict());
    }
  }

  result.generator = G.state_dict();
  result.discriminator = D.state_dict();
  return result;
}

ImageBuffer generate(UnetGeneratorT<float>& generator, const ImageBuffer& source,
                     bool use_dropout, std::uint64_t noise_seed) {
  const int div = 1 << generator.cfg.depth;
  if (source.channels() != generator.cfg.input_channels ||
      source.height() % div != 0 || source.width() % div != 0) {
    raise(ErrorCode::GeometryMismatch,
          "source geometry incompatible with the generator");
  }
  CounterRng noise(noise_seed);
  TapeT<float> tape(false);
  auto xv = nn::constant(tape, images_to_tanh_batch({&source}, 1));
  auto fake = generator.forward(tape, xv, Mode::Eval, use_dropout, noise);
  return tanh_slice_to_image(fake->value, 0);
}

// ---------------------------------------------------------------------------

#define EVNAT_INSTANTIATE_GAN(T)                                                   \
  template struct UnetGeneratorT<T>;                                               \
  template struct PatchDiscriminatorT<T>;                                          \
  template UnetGeneratorT<T> build_generator<T>(const GeneratorConfig&,            \
                                                std::uint64_t);                    \
  template PatchDiscriminatorT<T> build_discriminator<T>(const DiscriminatorConfig&,\
                                                         std::uint64_t);           \
  template nn::ValuePtrT<T> d_loss_from_probs<T>(nn::TapeT<T>&,                    \
                                                 const nn::ValuePtrT<T>&,          \
                                                 const nn::ValuePtrT<T>&);         \
  template nn::ValuePtrT<T> g_loss_from_probs<T>(nn::TapeT<T>&,                    \
                                                 const nn::ValuePtrT<T>&,          \
                                                 const nn::ValuePtrT<T>&,          \
                                                 const nn::ValuePtrT<T>&, T);

EVNAT_INSTANTIATE_GAN(float)
EVNAT_INSTANTIATE_GAN(double)

#undef EVNAT_INSTANTIATE_GAN

}  // namespace evnat::gan
