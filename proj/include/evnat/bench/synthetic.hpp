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
#include <string>
#include <vector>

#include "evnat/core/image.hpp"
#include "evnat/io/paired_dataset.hpp"

namespace evnat::bench {

/// Desk-scale 3-class task: filled shapes (square / circle / triangle) whose
/// fill color follows the class, rendered over a dark background with a
/// random lighting gradient and pixel noise. The gradient dims one side of
/// the image, which degrades edge extraction there — the same failure mode
/// the full-scale datasets exhibit — while leaving color classification
/// easy.
struct SyntheticConfig {
  int image_size = 32;
  int num_classes = 3;  // 2 or 3; class k uses shape k
  int train_count = 240;
  int val_count = 60;
  int test_count = 120;
  float lighting_strength = 0.55f;  // max relative attenuation, in [0,1)
  float noise_amplitude = 6.0f;     // uniform per-pixel noise, 8-bit units
  std::uint64_t seed = 0;
};

struct SyntheticSample {
  ImageBuffer target;  // RGB, 8-bit
  int label = 0;
};

const char* synthetic_class_name(int label);

/// Deterministic per (seed, split, index); splits draw from disjoint
/// substreams so their contents never overlap.
std::vector<SyntheticSample> make_synthetic_split(const SyntheticConfig& cfg,
                                                  Split split);

}  // namespace evnat::bench
