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

#include "evnat/spike/spike_synth.hpp"

#include "evnat/core/error.hpp"
#include "evnat/core/rng.hpp"

namespace evnat {

SpikeTrain poisson_encode(const ImageBuffer& image, int num_steps, float max_rate,
                          std::uint64_t seed) {
  if (image.channels() != 1) {
    raise(ErrorCode::MultiChannelInput, "poisson_encode expects a grayscale image");
  }
  if (num_steps < 0 || !(max_rate >= 0.0f && max_rate <= 1.0f)) {
    raise(ErrorCode::BadConfig, "num_steps must be >= 0 and max_rate in [0,1]");
  }
  SpikeTrain train;
  train.height = image.height();
  train.width = image.width();
  train.num_steps = num_steps;
  train.spikes.assign(static_cast<std::size_t>(num_steps) * image.height() *
                          image.width(),
                      0);
  CounterRng rng(seed);
  std::size_t idx = 0;
  for (int step = 0; step < num_steps; ++step) {
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x, ++idx) {
        const float rate = max_rate * image.value(y, x);
        train.spikes[idx] = rng.next_bernoulli(rate) ? 1 : 0;
      }
    }
  }
  return train;
}

EventStream spike_train_to_events(const SpikeTrain& train,
                                  std::uint64_t step_duration_us) {
  if (step_duration_us == 0) {
    raise(ErrorCode::BadConfig, "step duration must be positive");
  }
  EventStream stream;
  stream.sensor_width = static_cast<std::uint16_t>(train.width);
  stream.sensor_height = static_cast<std::uint16_t>(train.height);
  std::size_t idx = 0;
  for (int step = 0; step < train.num_steps; ++step) {
    const std::uint64_t t = static_cast<std::uint64_t>(step) * step_duration_us;
    for (int y = 0; y < train.height; ++y) {
      for (int x = 0; x < train.width; ++x, ++idx) {
        if (!train.spikes[idx]) continue;
        stream.events.push_back(Event{t, static_cast<std::uint16_t>(x),
                                      static_cast<std::uint16_t>(y), Polarity::On});
      }
    }
  }
  return stream;
}

}  // namespace evnat
