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

#include "evnat/spike/time_surface.hpp"

#include <cmath>
#include <optional>
#include <vector>

#include "evnat/core/error.hpp"

namespace evnat {

namespace {

bool keep_polarity(Polarity p, PolarityHandling handling) {
  switch (handling) {
    case PolarityHandling::Merge: return true;
    case PolarityHandling::OnOnly: return p == Polarity::On;
    case PolarityHandling::OffOnly: return p == Polarity::Off;
  }
  return true;
}

}  // namespace

ImageBuffer time_surface(const EventStream& stream, const TimeSurfaceConfig& cfg) {
  if (cfg.window_end <= cfg.window_start) {
    raise(ErrorCode::BadConfig, "time surface window must have positive length");
  }
  if (cfg.mode == TimeSurfaceMode::Exponential && !(cfg.tau_us > 0.0)) {
    raise(ErrorCode::BadConfig, "exponential mode requires tau > 0");
  }
  const int h = stream.sensor_height;
  const int w = stream.sensor_width;
  std::vector<float> out(static_cast<std::size_t>(h) * w, 0.0f);

  if (cfg.mode == TimeSurfaceMode::Count) {
    std::vector<std::uint32_t> counts(out.size(), 0);
    std::uint32_t max_count = 0;
    for (const Event& ev : stream.events) {
      if (ev.t < cfg.window_start || ev.t > cfg.window_end) continue;
      if (!keep_polarity(ev.polarity, cfg.polarity)) continue;
      const std::uint32_t c = ++counts[static_cast<std::size_t>(ev.y) * w + ev.x];
      if (c > max_count) max_count = c;
    }
    if (max_count > 0) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>(counts[i]) / static_cast<float>(max_count);
      }
    }
  } else {
    std::vector<std::optional<std::uint64_t>> last(out.size());
    for (const Event& ev : stream.events) {
      if (ev.t < cfg.window_start || ev.t > cfg.window_end) continue;
      if (!keep_polarity(ev.polarity, cfg.polarity)) continue;
      auto& slot = last[static_cast<std::size_t>(ev.y) * w + ev.x];
      if (!slot || ev.t > *slot) slot = ev.t;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!last[i]) continue;
      const double age = static_cast<double>(cfg.window_end - *last[i]);
      out[i] = static_cast<float>(std::exp(-age / cfg.tau_us));
    }
  }
  return ImageBuffer::real(h, w, 1, std::move(out));
}

}  // namespace evnat
