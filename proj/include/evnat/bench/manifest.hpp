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

#include <json.hpp>

namespace evnat::bench {

inline constexpr const char* kToolkitVersion = "0.1.0";

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::string hash_file(const std::string& path);  // "fnv1a64:<hex>"

/// Fingerprint of a directory tree: hash of the sorted (relative path, file
/// hash) pairs. Stable across filesystems and enumeration order.
std::string hash_tree(const std::string& root);

/// Skeleton manifest: toolkit version, RNG algorithm name, creation
/// timestamp (the timestamp lives only here, never in reports).
nlohmann::ordered_json manifest_base(const std::string& command);

void write_manifest(const std::string& path, const nlohmann::ordered_json& manifest);
nlohmann::ordered_json read_manifest(const std::string& path);

}  // namespace evnat::bench
