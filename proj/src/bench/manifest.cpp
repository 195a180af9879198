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

#include "evnat/bench/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "evnat/core/error.hpp"
#include "evnat/core/rng.hpp"

namespace fs = std::filesystem;

namespace evnat::bench {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return "fnv1a64:" + hex64(fnv1a64(bytes));
}

std::string hash_tree(const std::string& root) {
  std::vector<std::string> files;
  if (fs::exists(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file()) {
        files.push_back(fs::relative(entry.path(), root).generic_string());
      }
    }
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const std::string& rel : files) {
    acc += rel;
    acc += '\0';
    acc += hash_file((fs::path(root) / rel).string());
    acc += '\0';
  }
  return "fnv1a64:" +
         hex64(fnv1a64({reinterpret_cast<const std::uint8_t*>(acc.data()), acc.size()}));
}

nlohmann::ordered_json manifest_base(const std::string& command) {
  nlohmann::ordered_json m;
  m["toolkit_version"] = kToolkitVersion;
  m["command"] = command;
  m["rng_algorithm"] = CounterRng::kAlgorithm;
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  m["created_utc"] = buf;
  return m;
}

void write_manifest(const std::string& path, const nlohmann::ordered_json& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << manifest.dump(2) << "\n";
  if (!out) raise(ErrorCode::IoFailure, "short write to " + path);
}

nlohmann::ordered_json read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path);
  nlohmann::ordered_json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::BadConfig, std::string("manifest parse failure: ") + e.what());
  }
  return m;
}

}  // namespace evnat::bench
