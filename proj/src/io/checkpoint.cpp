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

#include "evnat/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "evnat/core/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "EVN1 serialization assumes a little-endian host");

namespace evnat {

namespace {

void put_u16(std::uint16_t v, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::uint32_t v, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

struct Cursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (bytes.size() - pos < n) {
      raise(ErrorCode::TruncatedRecord, "checkpoint ends mid-record");
    }
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = bytes[pos] | (std::uint16_t(bytes[pos + 1]) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = bytes[pos] | (std::uint32_t(bytes[pos + 1]) << 8) |
                      (std::uint32_t(bytes[pos + 2]) << 16) |
                      (std::uint32_t(bytes[pos + 3]) << 24);
    pos += 4;
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const std::vector<NamedTensor>& tensors) {
  std::vector<std::uint8_t> out = {'E', 'V', 'N', '1'};
  put_u32(static_cast<std::uint32_t>(tensors.size()), out);
  for (const NamedTensor& t : tensors) {
    if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      raise(ErrorCode::ValueOverflow, "tensor name too long");
    }
    if (t.dims.size() > 4) raise(ErrorCode::ShapeMismatch, "rank exceeds 4");
    std::size_t numel = 1;
    for (std::uint32_t d : t.dims) numel *= d;
    if (numel != t.values.size()) {
      raise(ErrorCode::ShapeMismatch, "dims do not match value count for " + t.name);
    }
    put_u16(static_cast<std::uint16_t>(t.name.size()), out);
    out.insert(out.end(), t.name.begin(), t.name.end());
    out.push_back(static_cast<std::uint8_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) put_u32(d, out);
    const std::size_t off = out.size();
    out.resize(off + t.values.size() * 4);
    std::memcpy(out.data() + off, t.values.data(), t.values.size() * 4);
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Cursor c{bytes};
  c.need(4);
  if (std::memcmp(bytes.data(), "EVN1", 4) != 0) {
    raise(ErrorCode::UnsupportedMagic, "missing EVN1 magic");
  }
  c.pos = 4;
  const std::uint32_t count = c.u32();
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const std::uint16_t name_len = c.u16();
    c.need(name_len);
    t.name.assign(reinterpret_cast<const char*>(bytes.data() + c.pos), name_len);
    c.pos += name_len;
    c.need(1);
    const std::uint8_t rank = bytes[c.pos++];
    if (rank > 4) raise(ErrorCode::ShapeMismatch, "rank exceeds 4 in " + t.name);
    std::size_t numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      t.dims.push_back(c.u32());
      numel *= t.dims.back();
    }
    c.need(numel * 4);
    t.values.resize(numel);
    std::memcpy(t.values.data(), bytes.data() + c.pos, numel * 4);
    c.pos += numel * 4;
    tensors.push_back(std::move(t));
  }
  if (c.pos != bytes.size()) {
    raise(ErrorCode::TruncatedRecord, "trailing bytes after last tensor");
  }
  return tensors;
}

void write_checkpoint_file(const std::string& path,
                           const std::vector<NamedTensor>& tensors) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(tensors);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoFailure, "cannot open " + tmp + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorCode::IoFailure, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) raise(ErrorCode::IoFailure, "rename to " + path + " failed: " + ec.message());
}

std::vector<NamedTensor> read_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace evnat
