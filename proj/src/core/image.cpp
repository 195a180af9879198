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

#include "evnat/core/image.hpp"

#include <algorithm>
#include <cmath>

namespace evnat {

namespace {

void check_dims(int height, int width, int channels) {
  if (height < 0 || width < 0 || (channels != 1 && channels != 3)) {
    raise(ErrorCode::ShapeMismatch, "image dims must be non-negative with 1 or 3 channels");
  }
}

}  // namespace

ImageBuffer ImageBuffer::u8(int height, int width, int channels,
                            std::vector<std::uint8_t> pixels) {
  check_dims(height, width, channels);
  const std::size_t n = static_cast<std::size_t>(height) * width * channels;
  if (pixels.empty()) pixels.assign(n, 0);
  if (pixels.size() != n) {
    raise(ErrorCode::ShapeMismatch, "pixel count does not match image dims");
  }
  ImageBuffer img;
  img.height_ = height;
  img.width_ = width;
  img.channels_ = channels;
  img.kind_ = Kind::U8;
  img.u8_ = std::move(pixels);
  return img;
}

ImageBuffer ImageBuffer::real(int height, int width, int channels,
                              std::vector<float> pixels) {
  check_dims(height, width, channels);
  const std::size_t n = static_cast<std::size_t>(height) * width * channels;
  if (pixels.empty()) pixels.assign(n, 0.0f);
  if (pixels.size() != n) {
    raise(ErrorCode::ShapeMismatch, "pixel count does not match image dims");
  }
  for (float v : pixels) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      raise(ErrorCode::ValueOverflow, "real image values must lie in [0,1]");
    }
  }
  ImageBuffer img;
  img.height_ = height;
  img.width_ = width;
  img.channels_ = channels;
  img.kind_ = Kind::Real;
  img.real_ = std::move(pixels);
  return img;
}

ImageBuffer ImageBuffer::to_real() const {
  if (kind_ == Kind::Real) return *this;
  std::vector<float> out(u8_.size());
  for (std::size_t i = 0; i < u8_.size(); ++i) out[i] = u8_[i] / 255.0f;
  return real(height_, width_, channels_, std::move(out));
}

ImageBuffer ImageBuffer::to_u8() const {
  if (kind_ == Kind::U8) return *this;
  std::vector<std::uint8_t> out(real_.size());
  for (std::size_t i = 0; i < real_.size(); ++i) {
    float v = std::clamp(real_[i], 0.0f, 1.0f) * 255.0f;
    out[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return u8(height_, width_, channels_, std::move(out));
}

ImageBuffer ImageBuffer::luminance() const {
  if (channels_ == 1) return *this;
  ImageBuffer src = to_real();
  std::vector<float> out(static_cast<std::size_t>(height_) * width_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      float v = 0.299f * src.real_at(y, x, 0) + 0.587f * src.real_at(y, x, 1) +
                0.114f * src.real_at(y, x, 2);
      out[static_cast<std::size_t>(y) * width_ + x] = std::clamp(v, 0.0f, 1.0f);
    }
  }
  ImageBuffer lum = real(height_, width_, 1, std::move(out));
  return kind_ == Kind::U8 ? lum.to_u8() : lum;
}

ImageBuffer ImageBuffer::expand_rgb() const {
  if (channels_ == 3) return *this;
  if (kind_ == Kind::U8) {
    std::vector<std::uint8_t> out(u8_.size() * 3);
    for (std::size_t i = 0; i < u8_.size(); ++i) {
      out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = u8_[i];
    }
    return u8(height_, width_, 3, std::move(out));
  }
  std::vector<float> out(real_.size() * 3);
  for (std::size_t i = 0; i < real_.size(); ++i) {
    out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = real_[i];
  }
  return real(height_, width_, 3, std::move(out));
}

}  // namespace evnat
