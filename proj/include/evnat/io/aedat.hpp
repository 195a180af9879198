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

#include "evnat/io/event.hpp"

namespace evnat {

/// Bit-field placement of x / y / polarity inside the 32-bit address word of
/// an AEDAT 2.0 record. Configurable so sensors other than the 128x128 DVS
/// can be decoded without code changes.
struct AddressLayout {
  std::uint32_t x_shift = 1;
  std::uint32_t x_bits = 7;
  std::uint32_t y_shift = 8;
  std::uint32_t y_bits = 7;
  std::uint32_t polarity_shift = 0;  // 1-bit field, 1 = ON
  std::uint16_t sensor_width = 128;
  std::uint16_t sensor_height = 128;

  /// x = (addr >> 1) & 0x7F, y = (addr >> 8) & 0x7F, polarity = addr & 1.
  static AddressLayout dvs128() { return AddressLayout{}; }

  std::uint32_t x_of(std::uint32_t addr) const {
    return (addr >> x_shift) & ((1u << x_bits) - 1);
  }
  std::uint32_t y_of(std::uint32_t addr) const {
    return (addr >> y_shift) & ((1u << y_bits) - 1);
  }
  Polarity polarity_of(std::uint32_t addr) const {
    return ((addr >> polarity_shift) & 1u) ? Polarity::On : Polarity::Off;
  }
};

/// Decodes AEDAT 2.0-style bytes: zero or more '#'-prefixed newline-terminated
/// header lines, then 8-byte big-endian records (32-bit address word, 32-bit
/// timestamp in microseconds). Timestamps are rebased so the first event is
/// t = 0.
EventStream parse_aedat(std::span<const std::uint8_t> bytes,
                        const AddressLayout& layout = AddressLayout::dvs128());

/// Inverse of parse_aedat: header line plus big-endian records. Lossless up
/// to the timestamp rebase; throws ValueOverflow when a field exceeds its
/// bit width.
std::vector<std::uint8_t> write_aedat(
    const EventStream& stream,
    const AddressLayout& layout = AddressLayout::dvs128());

EventStream read_aedat_file(const std::string& path,
                            const AddressLayout& layout = AddressLayout::dvs128());
void write_aedat_file(const std::string& path, const EventStream& stream,
                      const AddressLayout& layout = AddressLayout::dvs128());

}  // namespace evnat
