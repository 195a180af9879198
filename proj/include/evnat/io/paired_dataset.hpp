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

#include <string>
#include <vector>

#include "evnat/core/image.hpp"

namespace evnat {

/// One conditioning pair: the event-derived single-channel source, the raw
/// RGB target it was produced from, and the class label of both.
struct PairedSample {
  ImageBuffer source;  // 1 channel
  ImageBuffer target;  // 3 channels
  int label = 0;
  std::string id;      // "<class>/<id>", stable sort key
};

enum class Split { Train, Val, Test };

const char* to_string(Split split);
Split split_from_string(const std::string& name);

/// Loads `<root>/<split>/<class>/<id>.src.pgm` + `<id>.tgt.ppm` pairs in
/// lexicographic (class, id) order. Labels are indices into the sorted class
/// directory names. Orphan sources or targets raise MissingCounterpart;
/// differing spatial sizes within a pair raise SizeMismatch.
std::vector<PairedSample> load_paired_dataset(const std::string& root, Split split);

/// Class names (sorted) present under `<root>/<split>`.
std::vector<std::string> list_classes(const std::string& root, Split split);

}  // namespace evnat
