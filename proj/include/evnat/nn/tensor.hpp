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
#include <cstddef>
#include <string>
#include <vector>

#include "evnat/core/error.hpp"

namespace evnat::nn {

/// Dimension list, rank <= 4, NCHW convention for rank-4 data.
struct Shape {
  std::array<int, 4> dims{1, 1, 1, 1};
  int rank = 0;

  static Shape scalar() { return Shape{{1, 1, 1, 1}, 0}; }
  static Shape of1(int n) { return Shape{{n, 1, 1, 1}, 1}; }
  static Shape of2(int n, int c) { return Shape{{n, c, 1, 1}, 2}; }
  static Shape of4(int n, int c, int h, int w) { return Shape{{n, c, h, w}, 4}; }

  int n() const { return dims[0]; }
  int c() const { return dims[1]; }
  int h() const { return dims[2]; }
  int w() const { return dims[3]; }

  std::size_t numel() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2] * dims[3];
  }

  bool operator==(const Shape& o) const { return dims == o.dims && rank == o.rank; }

  std::string to_string() const {
    std::string s = "[";
    for (int i = 0; i < rank; ++i) {
      if (i) s += ",";
      s += std::to_string(dims[i]);
    }
    return s + "]";
  }
};

/// Dense value container. Storage precision is the template parameter; the
/// production engine runs float, the gradient-checking build runs double.
template <typename T>
struct TensorT {
  Shape shape;
  std::vector<T> data;

  TensorT() = default;
  explicit TensorT(Shape s, T fill = T(0)) : shape(s), data(s.numel(), fill) {}
  TensorT(Shape s, std::vector<T> values) : shape(s), data(std::move(values)) {
    if (data.size() != shape.numel()) {
      raise(ErrorCode::ShapeMismatch, "data length does not match shape " + s.to_string());
    }
  }

  std::size_t numel() const { return data.size(); }
  bool empty() const { return data.empty(); }

  T& at(int n, int c, int h, int w) {
    return data[((static_cast<std::size_t>(n) * shape.c() + c) * shape.h() + h) *
                    shape.w() + w];
  }
  T at(int n, int c, int h, int w) const {
    return data[((static_cast<std::size_t>(n) * shape.c() + c) * shape.h() + h) *
                    shape.w() + w];
  }
};

using Tensor = TensorT<float>;

}  // namespace evnat::nn
