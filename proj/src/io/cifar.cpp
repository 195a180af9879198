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

#include "evnat/io/cifar.hpp"

#include <fstream>

#include "evnat/core/error.hpp"

namespace evnat {

namespace {
constexpr std::size_t kSide = 32;
constexpr std::size_t kPlane = kSide * kSide;
constexpr std::size_t kRecord = 1 + 3 * kPlane;
}  // namespace

std::vector<LabeledImage> parse_cifar10_batch(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kRecord != 0) {
    raise(ErrorCode::TruncatedRecord,
          "batch length " + std::to_string(bytes.size()) +
              " is not a multiple of 3073");
  }
  std::vector<LabeledImage> records;
  records.reserve(bytes.size() / kRecord);
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    const std::uint8_t label = bytes[off];
    if (label > 9) {
      raise(ErrorCode::LabelOutOfRange,
            "label byte " + std::to_string(label) + " exceeds 9");
    }
    std::vector<std::uint8_t> pixels(3 * kPlane);
    const std::uint8_t* planes = bytes.data() + off + 1;
    for (std::size_t i = 0; i < kPlane; ++i) {
      pixels[3 * i + 0] = planes[i];
      pixels[3 * i + 1] = planes[kPlane + i];
      pixels[3 * i + 2] = planes[2 * kPlane + i];
    }
    records.push_back({label, ImageBuffer::u8(kSide, kSide, 3, std::move(pixels))});
  }
  return records;
}

std::vector<LabeledImage> read_cifar10_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_cifar10_batch(bytes);
}

}  // namespace evnat
