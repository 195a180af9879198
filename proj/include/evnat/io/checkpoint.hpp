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

namespace evnat {

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;  // rank <= 4
  std::vector<float> values;

  bool operator==(const NamedTensor&) const = default;
};

/// EVN1 container, bit-exact:
///   "EVN1" | u32 count | per tensor: u16 name_len | name | u8 rank |
///   rank x u32 dims | raw f32 values.
/// All integers and values little-endian.
std::vector<std::uint8_t> encode_checkpoint(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Write is atomic: a temp file in the same directory is renamed over the
/// destination once fully flushed.
void write_checkpoint_file(const std::string& path,
                           const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint_file(const std::string& path);

}  // namespace evnat
