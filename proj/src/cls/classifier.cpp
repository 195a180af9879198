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

#include "evnat/cls/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "evnat/nn/adam.hpp"

namespace evnat::cls {

using nn::Mode;
using nn::Shape;
using nn::TapeT;
using nn::TensorT;
using nn::ValuePtrT;

namespace {

void check_config(const ClassifierConfig& cfg) {
  if (cfg.input_side % 8 != 0 || cfg.input_side < 8) {
    raise(ErrorCode::IndivisibleSpatialSize,
          "classifier input side must be a positive multiple of 8");
  }
  if (cfg.num_classes < 2) raise(ErrorCode::BadConfig, "need at least 2 classes");
  for (float p : cfg.dropout_ps) {
    if (!(p >= 0.0f && p < 1.0f)) raise(ErrorCode::BadConfig, "dropout_ps in [0,1)");
  }
  if (cfg.augmentation.shift_pixels < 0 ||
      cfg.augmentation.shift_pixels >= cfg.input_side) {
    raise(ErrorCode::BadConfig, "shift_pixels must be in [0, input_side)");
  }
}

nn::Tensor images_to_unit_batch(const std::vector<const ImageBuffer*>& images,
                                int channels) {
  const int h = images[0]->height();
  const int w = images[0]->width();
  nn::Tensor batch(Shape::of4(static_cast<int>(images.size()), channels, h, w));
  for (std::size_t n = 0; n < images.size(); ++n) {
    const ImageBuffer& img = *images[n];
    if (img.channels() != channels || img.height() != h || img.width() != w) {
      raise(ErrorCode::SizeMismatch, "batch images must share geometry");
    }
    for (int c = 0; c < channels; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          batch.at(static_cast<int>(n), c, y, x) = img.value(y, x, c);
        }
      }
    }
  }
  return batch;
}

}  // namespace

template <typename T>
VggClassifierT<T> build_classifier(const ClassifierConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  CounterRng rng(seed);
  VggClassifierT<T> net;
  net.cfg = cfg;
  int in_ch = cfg.input_channels;
  for (int block = 0; block < 3; ++block) {
    const int out_ch = cfg.conv_filters[block];
    for (int rep = 0; rep < 2; ++rep) {
      const T he = static_cast<T>(std::sqrt(2.0 / (in_ch * 9.0)));
      net.convs.push_back(nn::Conv2dLayerT<T>::make(in_ch, out_ch, 3, 1, 1, he, rng));
      net.bns.push_back(nn::BatchNormLayerT<T>::make(out_ch, T(0), rng));
      in_ch = out_ch;
    }
  }
  const int side_after_pools = cfg.input_side / 8;
  const int dense_in = cfg.conv_filters[2] * side_after_pools * side_after_pools;
  const T dense_std = static_cast<T>(std::sqrt(1.0 / dense_in));
  net.dense = nn::Conv2dLayerT<T>::make(dense_in, cfg.num_classes, 1, 1, 0,
                                        dense_std, rng);
  return net;
}

template <typename T>
ValuePtrT<T> VggClassifierT<T>::forward(TapeT<T>& tape, const ValuePtrT<T>& x,
                                        Mode mode, CounterRng& rng) {
  const Shape xs = x->value.shape;
  if (xs.c() != cfg.input_channels || xs.h() != cfg.input_side ||
      xs.w() != cfg.input_side) {
    raise(ErrorCode::ShapeMismatch, "classifier input geometry mismatch");
  }
  ValuePtrT<T> h = x;
  for (int block = 0; block < 3; ++block) {
    for (int rep = 0; rep < 2; ++rep) {
      const int li = block * 2 + rep;
      h = convs[li](tape, h);
      h = bns[li](tape, h, mode);
      h = nn::leaky_relu(tape, h, static_cast<T>(cfg.leaky_slope));
    }
    h = nn::max_pool2d(tape, h, 2, 2);
    h = nn::dropout(tape, h, static_cast<T>(cfg.dropout_ps[block]), rng, mode);
  }
  const Shape hs = h->value.shape;
  h = nn::reshape(tape, h, Shape::of4(hs.n(), hs.c() * hs.h() * hs.w(), 1, 1));
  h = dense(tape, h);
  return nn::reshape(tape, h, Shape::of2(hs.n(), cfg.num_classes));
}

template <typename T>
std::vector<ValuePtrT<T>> VggClassifierT<T>::parameters() const {
  std::vector<ValuePtrT<T>> params;
  for (const auto& l : convs) {
    params.push_back(l.w);
    params.push_back(l.b);
  }
  for (const auto& bn : bns) {
    params.push_back(bn.gamma);
    params.push_back(bn.beta);
  }
  params.push_back(dense.w);
  params.push_back(dense.b);
  return params;
}

template <typename T>
std::size_t VggClassifierT<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : parameters()) total += p->value.numel();
  return total;
}

template <typename T>
std::vector<NamedTensor> VggClassifierT<T>::state_dict() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    out.push_back(nn::to_named("conv" + std::to_string(i) + ".w", convs[i].w->value));
    out.push_back(nn::to_named("conv" + std::to_string(i) + ".b", convs[i].b->value));
    const std::string bn = "bn" + std::to_string(i);
    out.push_back(nn::to_named(bn + ".gamma", bns[i].gamma->value));
    out.push_back(nn::to_named(bn + ".beta", bns[i].beta->value));
    out.push_back(nn::to_named(bn + ".running_mean", bns[i].state.running_mean));
    out.push_back(nn::to_named(bn + ".running_var", bns[i].state.running_var));
  }
  out.push_back(nn::to_named("dense.w", dense.w->value));
  out.push_back(nn::to_named("dense.b", dense.b->value));
  return out;
}

template <typename T>
void VggClassifierT<T>::load_state_dict(const std::vector<NamedTensor>& tensors) {
  nn::StateDictReader reader(tensors);
  for (std::size_t i = 0; i < convs.size(); ++i) {
    nn::from_named(reader.get("conv" + std::to_string(i) + ".w"), convs[i].w->value);
    nn::from_named(reader.get("conv" + std::to_string(i) + ".b"), convs[i].b->value);
    const std::string bn = "bn" + std::to_string(i);
    nn::from_named(reader.get(bn + ".gamma"), bns[i].gamma->value);
    nn::from_named(reader.get(bn + ".beta"), bns[i].beta->value);
    nn::from_named(reader.get(bn + ".running_mean"), bns[i].state.running_mean);
    nn::from_named(reader.get(bn + ".running_var"), bns[i].state.running_var);
  }
  nn::from_named(reader.get("dense.w"), dense.w->value);
  nn::from_named(reader.get("dense.b"), dense.b->value);
}

// ---------------------------------------------------------------------------
// augmentation
// ---------------------------------------------------------------------------

ImageBuffer flip_horizontal(const ImageBuffer& image) {
  ImageBuffer out = image;
  const int h = image.height(), w = image.width(), c = image.channels();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        if (image.kind() == ImageBuffer::Kind::U8) {
          out.u8_at(y, x, ch) = image.u8_at(y, w - 1 - x, ch);
        } else {
          out.real_at(y, x, ch) = image.real_at(y, w - 1 - x, ch);
        }
      }
    }
  }
  return out;
}

namespace {
int reflect_idx(int idx, int n) {
  if (n == 1) return 0;
  while (idx < 0 || idx >= n) {
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * n - 2 - idx;
  }
  return idx;
}
}  // namespace

ImageBuffer shift_reflect(const ImageBuffer& image, int dx, int dy) {
  ImageBuffer out = image;
  const int h = image.height(), w = image.width(), c = image.channels();
  for (int y = 0; y < h; ++y) {
    const int sy = reflect_idx(y - dy, h);
    for (int x = 0; x < w; ++x) {
      const int sx = reflect_idx(x - dx, w);
      for (int ch = 0; ch < c; ++ch) {
        if (image.kind() == ImageBuffer::Kind::U8) {
          out.u8_at(y, x, ch) = image.u8_at(sy, sx, ch);
        } else {
          out.real_at(y, x, ch) = image.real_at(sy, sx, ch);
        }
      }
    }
  }
  return out;
}

ImageBuffer augment(const ImageBuffer& image, const AugmentConfig& cfg,
                    CounterRng& rng) {
  ImageBuffer out = image;
  if (cfg.flip && rng.next_bernoulli(0.5f)) {
    out = flip_horizontal(out);
  }
  if (cfg.shift_pixels > 0) {
    const int span = 2 * cfg.shift_pixels + 1;
    const int dx = static_cast<int>(rng.next_below(span)) - cfg.shift_pixels;
    const int dy = static_cast<int>(rng.next_below(span)) - cfg.shift_pixels;
    if (dx != 0 || dy != 0) out = shift_reflect(out, dx, dy);
  }
  return out;
}

ImageBuffer augment(const ImageBuffer& image, const AugmentConfig& cfg,
                    std::uint64_t seed) {
  CounterRng rng(seed);
  return augment(image, cfg, rng);
}

// ---------------------------------------------------------------------------
// training / evaluation
// ---------------------------------------------------------------------------

ClassifierTrainResult train_classifier(const std::vector<LabeledImage>& data,
                                       const ClassifierConfig& cfg, int epochs,
                                       std::uint64_t seed) {
  if (data.empty()) raise(ErrorCode::EmptyDataset, "no training samples");
  for (const LabeledImage& s : data) {
    if (s.label < 0 || s.label >= cfg.num_classes) {
      raise(ErrorCode::LabelOutOfRange, "label " + std::to_string(s.label));
    }
  }
  CounterRng root(seed);
  auto net = build_classifier<float>(cfg, root.fork(1).next_u64());
  CounterRng shuffle_rng = root.fork(2);
  CounterRng aug_rng = root.fork(3);
  CounterRng dropout_rng = root.fork(4);
  nn::Adam opt(net.parameters(), {cfg.lr, 0.9f, 0.999f, 1e-8f});

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  ClassifierTrainResult result;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    }
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<ImageBuffer> augmented;
      std::vector<const ImageBuffer*> ptrs;
      std::vector<int> labels;
      augmented.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        augmented.push_back(augment(data[order[i]].image, cfg.augmentation, aug_rng));
        labels.push_back(data[order[i]].label);
      }
      for (const ImageBuffer& img : augmented) ptrs.push_back(&img);

      TapeT<float> tape(true);
      auto x = nn::constant(tape, images_to_unit_batch(ptrs, cfg.input_channels));
      auto logits = net.forward(tape, x, Mode::Train, dropout_rng);
      auto loss = nn::softmax_cross_entropy(tape, logits, labels);
      opt.zero_grad();
      tape.backward(loss);
      opt.step();
      epoch_loss += loss->value.data[0];
      ++batches;
    }
    ClassifierEpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss / batches;
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(log);
  }
  result.state = net.state_dict();
  return result;
}

EvalResult evaluate(VggClassifierT<float>& classifier,
                    const std::vector<LabeledImage>& data) {
  if (data.empty()) raise(ErrorCode::EmptyDataset, "no evaluation samples");
  const ClassifierConfig& cfg = classifier.cfg;
  EvalResult result;
  result.confusion.assign(cfg.num_classes, std::vector<int>(cfg.num_classes, 0));
  CounterRng unused(0);
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(data.size(), start + cfg.batch_size);
    std::vector<const ImageBuffer*> ptrs;
    std::vector<int> labels;
    for (std::size_t i = start; i < end; ++i) {
      ptrs.push_back(&data[i].image);
      labels.push_back(data[i].label);
    }
    TapeT<float> tape(false);
    auto x = nn::constant(tape, images_to_unit_batch(ptrs, cfg.input_channels));
    auto logits = classifier.forward(tape, x, Mode::Eval, unused);
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      const float* row =
          logits->value.data.data() + i * static_cast<std::size_t>(cfg.num_classes);
      int best = 0;
      for (int k = 1; k < cfg.num_classes; ++k) {
        if (row[k] > row[best]) best = k;
      }
      result.predictions.push_back(best);
      if (labels[i] >= 0 && labels[i] < cfg.num_classes) {
        result.confusion[labels[i]][best]++;
        if (best == labels[i]) ++correct;
      } else {
        raise(ErrorCode::LabelOutOfRange, "label " + std::to_string(labels[i]));
      }
    }
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return result;
}

template struct VggClassifierT<float>;
template struct VggClassifierT<double>;
template VggClassifierT<float> build_classifier<float>(const ClassifierConfig&,
                                                       std::uint64_t);
template VggClassifierT<double> build_classifier<double>(const ClassifierConfig&,
                                                         std::uint64_t);

}  // namespace evnat::cls
