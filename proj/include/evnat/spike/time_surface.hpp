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

#include "evnat/core/image.hpp"
#include "evnat/io/event.hpp"

namespace evnat {

enum class TimeSurfaceMode { Count, Exponential };
enum class PolarityHandling { Merge, OnOnly, OffOnly };

/// Integration window and kernel for turning an event stream into a frame.
/// The window is inclusive on both ends, in stream-relative microseconds.
struct TimeSurfaceConfig {
  std::uint64_t window_start = 0;
  std::uint64_t window_end = 0;
  TimeSurfaceMode mode = TimeSurfaceMode::Count;
  double tau_us = 0.0;  // exponential decay constant
  PolarityHandling polarity = PolarityHandling::Merge;
};

/// Count mode: per-pixel in-window event count normalized by the maximum
/// per-pixel count (all-zero frame when the window is empty). Exponential
/// mode: exp(-(window_end - t_last)/tau) per pixel, 0 where no event landed.
/// Output is a single-channel real frame in [0,1].
ImageBuffer time_surface(const EventStream& stream, const TimeSurfaceConfig& cfg);

}  // namespace evnat
