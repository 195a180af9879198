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

#include "evnat/io/aedat.hpp"

#include <fstream>
#include <limits>

#include "evnat/core/error.hpp"

namespace evnat {

namespace {

constexpr std::size_t kRecordSize = 8;

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void write_be32(std::uint32_t v, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

// Consumes '#'-prefixed header lines, returns the offset of the first body
// byte. A header line that runs into the end of input without a newline is
// malformed.
std::size_t skip_header(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  while (pos < bytes.size() && bytes[pos] == '#') {
    std::size_t eol = pos;
    while (eol < bytes.size() && bytes[eol] != '\n') ++eol;
    if (eol == bytes.size()) {
      raise(ErrorCode::EmptyHeaderMalformed,
            "header line lacks terminating newline");
    }
    pos = eol + 1;
  }
  return pos;
}

}  // namespace

EventStream parse_aedat(std::span<const std::uint8_t> bytes,
                        const AddressLayout& layout) {
  const std::size_t body_start = skip_header(bytes);
  const std::size_t body_len = bytes.size() - body_start;
  if (body_len % kRecordSize != 0) {
    raise(ErrorCode::TruncatedRecord,
          "body length " + std::to_string(body_len) + " is not a multiple of 8");
  }

  EventStream stream;
  stream.sensor_width = layout.sensor_width;
  stream.sensor_height = layout.sensor_height;
  stream.events.reserve(body_len / kRecordSize);

  std::uint64_t base = 0;
  std::uint64_t prev = 0;
  for (std::size_t off = body_start; off < bytes.size(); off += kRecordSize) {
    const std::uint32_t addr = read_be32(bytes.data() + off);
    const std::uint32_t ts = read_be32(bytes.data() + off + 4);

    Event ev;
    ev.x = static_cast<std::uint16_t>(layout.x_of(addr));
    ev.y = static_cast<std::uint16_t>(layout.y_of(addr));
    ev.polarity = layout.polarity_of(addr);
    if (ev.x >= layout.sensor_width || ev.y >= layout.sensor_height) {
      raise(ErrorCode::AddressOutOfBounds,
            "event at (" + std::to_string(ev.x) + "," + std::to_string(ev.y) +
                ") exceeds sensor geometry");
    }
    if (stream.events.empty()) {
      base = ts;
    } else if (ts < prev) {
      raise(ErrorCode::NonMonotonicTimestamp,
            "timestamps must be non-decreasing in stream order");
    }
    prev = ts;
    ev.t = ts - base;
    stream.events.push_back(ev);
  }
  return stream;
}

std::vector<std::uint8_t> write_aedat(const EventStream& stream,
                                      const AddressLayout& layout) {
  static const std::string header = "#!AER-DAT2.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + stream.events.size() * kRecordSize);

  const std::uint32_t x_max = (1u << layout.x_bits) - 1;
  const std::uint32_t y_max = (1u << layout.y_bits) - 1;
  for (const Event& ev : stream.events) {
    if (ev.x > x_max || ev.y > y_max) {
      raise(ErrorCode::ValueOverflow, "event coordinate exceeds bit-field width");
    }
    if (ev.t > std::numeric_limits<std::uint32_t>::max()) {
      raise(ErrorCode::ValueOverflow, "timestamp exceeds 32 bits");
    }
    std::uint32_t addr = (static_cast<std::uint32_t>(ev.x) << layout.x_shift) |
                         (static_cast<std::uint32_t>(ev.y) << layout.y_shift);
    if (ev.polarity == Polarity::On) addr |= 1u << layout.polarity_shift;
    write_be32(addr, out);
    write_be32(static_cast<std::uint32_t>(ev.t), out);
  }
  return out;
}

EventStream read_aedat_file(const std::string& path, const AddressLayout& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_aedat(bytes, layout);
}

void write_aedat_file(const std::string& path, const EventStream& stream,
                      const AddressLayout& layout) {
  const std::vector<std::uint8_t> bytes = write_aedat(stream, layout);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace evnat
