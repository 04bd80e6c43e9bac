#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace overiva {

// Multichannel real signal, channel-major: samples[c * frames + n].
struct AudioBuffer {
  double sample_rate = 16000.0;
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::vector<double> samples;

  AudioBuffer() = default;
  AudioBuffer(double rate, std::size_t num_channels, std::size_t num_frames)
      : sample_rate(rate),
        channels(num_channels),
        frames(num_frames),
        samples(num_channels * num_frames, 0.0) {}

  std::span<double> channel(std::size_t c) { return {samples.data() + c * frames, frames}; }
  std::span<const double> channel(std::size_t c) const {
    return {samples.data() + c * frames, frames};
  }
  double duration() const { return static_cast<double>(frames) / sample_rate; }
};

}  // namespace overiva
