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

#include "evnat/io/paired_dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <map>

#include "evnat/core/error.hpp"
#include "evnat/io/pnm.hpp"

namespace fs = std::filesystem;

namespace evnat {

const char* to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  raise(ErrorCode::BadConfig, "unknown split '" + name + "'");
}

std::vector<std::string> list_classes(const std::string& root, Split split) {
  const fs::path dir = fs::path(root) / to_string(split);
  std::vector<std::string> classes;
  if (!fs::exists(dir)) return classes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) classes.push_back(entry.path().filename().string());
  }
  std::sort(classes.begin(), classes.end());
  return classes;
}

std::vector<PairedSample> load_paired_dataset(const std::string& root, Split split) {
  const fs::path split_dir = fs::path(root) / to_string(split);
  std::vector<PairedSample> samples;
  const std::vector<std::string> classes = list_classes(root, split);

  for (std::size_t label = 0; label < classes.size(); ++label) {
    const fs::path class_dir = split_dir / classes[label];

    // id -> (has src, has tgt)
    std::map<std::string, std::pair<bool, bool>> ids;
    for (const auto& entry : fs::directory_iterator(class_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name.ends_with(".src.pgm")) {
        ids[name.substr(0, name.size() - 8)].first = true;
      } else if (name.ends_with(".tgt.ppm")) {
        ids[name.substr(0, name.size() - 8)].second = true;
      }
    }

    for (const auto& [id, present] : ids) {
      if (!present.first || !present.second) {
        raise(ErrorCode::MissingCounterpart,
              classes[label] + "/" + id + " lacks its " +
                  (present.first ? "target" : "source") + " file");
      }
      PairedSample sample;
      sample.source = read_pnm_file((class_dir / (id + ".src.pgm")).string());
      sample.target = read_pnm_file((class_dir / (id + ".tgt.ppm")).string());
      sample.label = static_cast<int>(label);
      sample.id = classes[label] + "/" + id;
      if (sample.source.height() != sample.target.height() ||
          sample.source.width() != sample.target.width()) {
        raise(ErrorCode::SizeMismatch,
              sample.id + ": source and target sizes differ");
      }
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

}  // namespace evnat
