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

/// Binary Netpbm decode: P5 (grayscale) or P6 (RGB), maxval 255 only.
ImageBuffer read_pnm(std::span<const std::uint8_t> bytes);

/// Encodes an 8-bit buffer as P5/P6 with maxval 255. Real buffers are
/// quantized to 8-bit first. read_pnm(write_pnm(img)) == img for 8-bit input.
std::vector<std::uint8_t> write_pnm(const ImageBuffer& image);

ImageBuffer read_pnm_file(const std::string& path);
void write_pnm_file(const std::string& path, const ImageBuffer& image);

}  // namespace evnat
