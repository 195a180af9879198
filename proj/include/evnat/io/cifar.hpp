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
#include <span>
#include <string>
#include <vector>

#include "evnat/core/image.hpp"

namespace evnat {

struct LabeledImage {
  int label = 0;
  ImageBuffer image;
};

/// Decodes a CIFAR-10 binary batch: 3073-byte records of one label byte
/// followed by 1024-byte R, G, B planes (row-major). Planes are interleaved
/// into a 32x32x3 buffer.
std::vector<LabeledImage> parse_cifar10_batch(std::span<const std::uint8_t> bytes);

std::vector<LabeledImage> read_cifar10_file(const std::string& path);

}  // namespace evnat
