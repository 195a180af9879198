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
#include <vector>

#include "evnat/core/image.hpp"
#include "evnat/io/event.hpp"

namespace evnat {

/// Binary spike occupancy per (step, y, x).
struct SpikeTrain {
  int height = 0;
  int width = 0;
  int num_steps = 0;
  std::vector<std::uint8_t> spikes;  // step-major, then row-major; values 0/1

  bool at(int step, int y, int x) const {
    return spikes[(static_cast<std::size_t>(step) * height + y) * width + x] != 0;
  }
  std::size_t count() const {
    std::size_t total = 0;
    for (std::uint8_t s : spikes) total += s;
    return total;
  }
};

/// Rate coding: each pixel fires independently per step as
/// Bernoulli(max_rate * intensity), intensity in [0,1]. Deterministic for a
/// given seed (counter-based generator, draw order step-major row-major).
SpikeTrain poisson_encode(const ImageBuffer& image, int num_steps, float max_rate,
                          std::uint64_t seed);

/// Each set bit at (k, y, x) becomes an ON event at t = k * step_duration.
/// Events come out ordered by t then row-major; the total count is preserved.
EventStream spike_train_to_events(const SpikeTrain& train,
                                  std::uint64_t step_duration_us);

}  // namespace evnat
