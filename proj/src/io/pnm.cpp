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

#include "evnat/io/pnm.hpp"

#include <cctype>
#include <fstream>

#include "evnat/core/error.hpp"

namespace evnat {

namespace {

// Reads the next unsigned decimal token, skipping whitespace and
// '#'-to-end-of-line comments per the Netpbm header grammar.
long next_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
    raise(ErrorCode::BodyTooShort, "missing numeric field in Netpbm header");
  }
  long value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1 << 30) raise(ErrorCode::ValueOverflow, "Netpbm header field too large");
    ++pos;
  }
  return value;
}

}  // namespace

ImageBuffer read_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) raise(ErrorCode::BodyTooShort, "input shorter than magic");
  const char m0 = static_cast<char>(bytes[0]);
  const char m1 = static_cast<char>(bytes[1]);
  int channels = 0;
  if (m0 == 'P' && m1 == '5') channels = 1;
  else if (m0 == 'P' && m1 == '6') channels = 3;
  else raise(ErrorCode::UnsupportedMagic, "expected P5 or P6 magic");

  std::size_t pos = 2;
  const long width = next_token(bytes, pos);
  const long height = next_token(bytes, pos);
  const long maxval = next_token(bytes, pos);
  if (maxval != 255) raise(ErrorCode::MaxvalUnsupported, "only maxval 255 is supported");
  if (pos >= bytes.size()) raise(ErrorCode::BodyTooShort, "missing body");
  ++pos;  // single whitespace byte after maxval

  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos < n) {
    raise(ErrorCode::BodyTooShort,
          "body has " + std::to_string(bytes.size() - pos) + " bytes, needs " +
              std::to_string(n));
  }
  std::vector<std::uint8_t> pixels(bytes.begin() + pos, bytes.begin() + pos + n);
  return ImageBuffer::u8(static_cast<int>(height), static_cast<int>(width),
                         channels, std::move(pixels));
}

std::vector<std::uint8_t> write_pnm(const ImageBuffer& image) {
  const ImageBuffer img = image.kind() == ImageBuffer::Kind::U8 ? image : image.to_u8();
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.u8_data().begin(), img.u8_data().end());
  return out;
}

ImageBuffer read_pnm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_pnm(bytes);
}

void write_pnm_file(const std::string& path, const ImageBuffer& image) {
  const std::vector<std::uint8_t> bytes = write_pnm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace evnat
