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
#include <optional>
#include <vector>

namespace evnat {

enum class Polarity : std::uint8_t { Off = 0, On = 1 };

/// One address-event: timestamp in microseconds since stream start plus the
/// pixel address and change polarity.
struct Event {
  std::uint64_t t = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Polarity polarity = Polarity::On;

  bool operator==(const Event&) const = default;
};

/// Ordered event sequence with the sensor geometry it was recorded on.
/// Timestamps are non-decreasing in stream order; an empty stream is valid.
struct EventStream {
  std::uint16_t sensor_width = 0;
  std::uint16_t sensor_height = 0;
  std::vector<Event> events;
  std::optional<int> label;

  bool operator==(const EventStream&) const = default;
};

}  // namespace evnat
