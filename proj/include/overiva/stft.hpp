#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "overiva/audio.hpp"
#include "overiva/linalg.hpp"

namespace overiva {

enum class Window { sqrt_hann };

struct StftConfig {
  std::size_t frame_len = 4096;
  std::size_t hop = 1024;
  Window window = Window::sqrt_hann;

  std::size_t bins() const noexcept { return frame_len / 2 + 1; }
  // Throws invalid_argument unless frame_len is a power of two and hop
  // divides it at least twice over.
  void validate() const;
};

// x(f, t) in C^M for every bin and frame; stored bin-major so each bin is a
// contiguous T x M block: values[(f * T + t) * M + m].
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t bins, std::size_t frames, std::size_t channels);

  std::size_t bins() const noexcept { return bins_; }
  std::size_t frames() const noexcept { return frames_; }
  std::size_t channels() const noexcept { return channels_; }

  cplx& operator()(std::size_t f, std::size_t t, std::size_t m) noexcept {
    return values_[(f * frames_ + t) * channels_ + m];
  }
  const cplx& operator()(std::size_t f, std::size_t t, std::size_t m) const noexcept {
    return values_[(f * frames_ + t) * channels_ + m];
  }
  std::span<const cplx> frame(std::size_t f, std::size_t t) const noexcept {
    return {values_.data() + (f * frames_ + t) * channels_, channels_};
  }
  std::span<cplx> frame(std::size_t f, std::size_t t) noexcept {
    return {values_.data() + (f * frames_ + t) * channels_, channels_};
  }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }

 private:
  std::size_t bins_ = 0;
  std::size_t frames_ = 0;
  std::size_t channels_ = 0;
  std::vector<cplx> values_;
};

std::vector<double> analysis_window(const StftConfig& cfg);

// Leading padding of frame_len - hop zeros; trailing padding of the same plus
// whatever completes the last hop, so every input sample sees full overlap.
std::size_t stft_frames(std::size_t length, const StftConfig& cfg);

Spectrogram stft(const AudioBuffer& signal, const StftConfig& cfg);

// Weighted overlap-add with the analysis window. length == 0 returns every
// sample the frames cover after stripping the leading padding.
AudioBuffer istft(const Spectrogram& spec, const StftConfig& cfg, std::size_t length = 0,
                  double sample_rate = 16000.0);

}  // namespace overiva
