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

#include "evnat/core/error.hpp"

namespace evnat {

/// Row-major H x W x C pixel array. Stores either 8-bit values in [0,255]
/// or real values in [0,1]; the storage kind is tagged so callers never
/// guess which normalization a buffer carries.
class ImageBuffer {
 public:
  enum class Kind { U8, Real };

  ImageBuffer() = default;

  static ImageBuffer u8(int height, int width, int channels,
                        std::vector<std::uint8_t> pixels = {});
  static ImageBuffer real(int height, int width, int channels,
                          std::vector<float> pixels = {});

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  Kind kind() const { return kind_; }
  std::size_t size() const {
    return static_cast<std::size_t>(height_) * width_ * channels_;
  }
  bool empty() const { return size() == 0; }

  std::uint8_t& u8_at(int y, int x, int c = 0) { return u8_[index(y, x, c)]; }
  std::uint8_t u8_at(int y, int x, int c = 0) const { return u8_[index(y, x, c)]; }
  float& real_at(int y, int x, int c = 0) { return real_[index(y, x, c)]; }
  float real_at(int y, int x, int c = 0) const { return real_[index(y, x, c)]; }

  const std::vector<std::uint8_t>& u8_data() const { return u8_; }
  std::vector<std::uint8_t>& u8_data() { return u8_; }
  const std::vector<float>& real_data() const { return real_; }
  std::vector<float>& real_data() { return real_; }

  /// Value at (y, x, c) as a real in [0,1] regardless of storage kind.
  float value(int y, int x, int c = 0) const {
    return kind_ == Kind::U8 ? u8_[index(y, x, c)] / 255.0f : real_[index(y, x, c)];
  }

  ImageBuffer to_real() const;
  /// Real -> 8-bit with round-half-up on clamped [0,1] values.
  ImageBuffer to_u8() const;
  /// RGB -> single channel via 0.299 R + 0.587 G + 0.114 B (identity on 1ch).
  ImageBuffer luminance() const;
  /// 1 channel replicated to 3 (identity on 3ch).
  ImageBuffer expand_rgb() const;

  bool operator==(const ImageBuffer& other) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  Kind kind_ = Kind::U8;
  std::vector<std::uint8_t> u8_;
  std::vector<float> real_;
};

}  // namespace evnat
