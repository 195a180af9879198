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

#include "evnat/core/image.hpp"

namespace evnat {

/// Thresholds are fractions of the per-image maximum gradient magnitude, not
/// absolute values, so one parameter set behaves consistently across
/// datasets.
struct CannyParams {
  float sigma = 1.0f;
  float low_threshold = 0.1f;
  float high_threshold = 0.3f;
};

/// Separable Gaussian, radius ceil(3*sigma), kernel normalized to sum 1,
/// reflect padding (mirror without repeating the border sample).
ImageBuffer gaussian_blur(const ImageBuffer& image, float sigma);

/// 3x3 Sobel with reflect padding. Direction is atan2(gy, gx) with y growing
/// downward; magnitude is sqrt(gx^2 + gy^2) normalized by nothing.
struct SobelGradients {
  int height = 0;
  int width = 0;
  ImageBuffer magnitude;          // single channel, real, NOT clamped to [0,1]
  std::vector<float> direction;   // radians, row-major
};
SobelGradients sobel_gradients(const ImageBuffer& image);

/// Full pipeline: blur, Sobel, non-maximum suppression with the gradient
/// direction quantized to {0,45,90,135} degrees, then double-threshold
/// hysteresis (strong >= high*max_mag seeds; weak >= low*max_mag kept iff
/// 8-connected to a strong pixel through weak pixels). RGB input is reduced
/// to luminance first. Output is binary {0,1}, real storage.
ImageBuffer canny(const ImageBuffer& image, const CannyParams& params);

/// Precomputed HED-style soft edge map from a PGM file, normalized to [0,1].
ImageBuffer load_soft_edges(const std::string& path);

}  // namespace evnat
