#include "overiva/stft.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "overiva/error.hpp"
#include "overiva/fft.hpp"

namespace overiva {

void StftConfig::validate() const {
  const bool pow2 = frame_len >= 2 && (frame_len & (frame_len - 1)) == 0;
  if (!pow2) throw Error(Errc::invalid_argument, "frame length must be a power of two");
  if (hop == 0 || frame_len % hop != 0 || frame_len / hop < 2) {
    throw Error(Errc::invalid_argument,
                "hop must divide the frame length with at least two frames of overlap");
  }
}

Spectrogram::Spectrogram(std::size_t bins, std::size_t frames, std::size_t channels)
    : bins_(bins), frames_(frames), channels_(channels), values_(bins * frames * channels) {}

std::vector<double> analysis_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.frame_len);
  const double n = static_cast<double>(cfg.frame_len);
  for (std::size_t i = 0; i < cfg.frame_len; ++i) {
    // periodic Hann, square-rooted
    w[i] = std::sqrt(0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n)));
  }
  return w;
}

namespace {

std::size_t tail_padding(std::size_t length, const StftConfig& cfg) {
  return cfg.frame_len - cfg.hop + (cfg.hop - length % cfg.hop) % cfg.hop;
}

}  // namespace

std::size_t stft_frames(std::size_t length, const StftConfig& cfg) {
  const std::size_t padded = (cfg.frame_len - cfg.hop) + length + tail_padding(length, cfg);
  return (padded - cfg.frame_len) / cfg.hop + 1;
}

Spectrogram stft(const AudioBuffer& signal, const StftConfig& cfg) {
  cfg.validate();
  if (signal.frames < cfg.frame_len) {
    throw Error(Errc::signal_too_short, "signal has " + std::to_string(signal.frames) +
                                            " samples, frame length is " +
                                            std::to_string(cfg.frame_len));
  }
  const std::size_t lead = cfg.frame_len - cfg.hop;
  const std::size_t frames = stft_frames(signal.frames, cfg);
  const std::size_t bins = cfg.bins();
  const auto window = analysis_window(cfg);
  const RealFft fft(cfg.frame_len);

  Spectrogram spec(bins, frames, signal.channels);
  std::vector<double> buf(cfg.frame_len);
  std::vector<cplx> out(bins);
  for (std::size_t m = 0; m < signal.channels; ++m) {
    const auto x = signal.channel(m);
    for (std::size_t t = 0; t < frames; ++t) {
      const std::size_t start = t * cfg.hop;  // in padded coordinates
      for (std::size_t i = 0; i < cfg.frame_len; ++i) {
        const std::size_t p = start + i;
        const double v = (p >= lead && p - lead < x.size()) ? x[p - lead] : 0.0;
        buf[i] = v * window[i];
      }
      fft.forward(buf, out);
      for (std::size_t f = 0; f < bins; ++f) spec(f, t, m) = out[f];
    }
  }
  return spec;
}

AudioBuffer istft(const Spectrogram& spec, const StftConfig& cfg, std::size_t length,
                  double sample_rate) {
  cfg.validate();
  if (spec.bins() != cfg.bins() || spec.frames() == 0 || spec.channels() == 0) {
    throw Error(Errc::shape_mismatch, "spectrogram does not match the STFT configuration");
  }
  const std::size_t lead = cfg.frame_len - cfg.hop;
  const std::size_t frames = spec.frames();
  const std::size_t padded = (frames - 1) * cfg.hop + cfg.frame_len;
  const std::size_t available = padded - 2 * lead;
  if (length == 0) length = available;
  if (length > available) {
    throw Error(Errc::shape_mismatch, "requested length exceeds what the frames cover");
  }

  const auto window = analysis_window(cfg);
  double ola = 0.0;
  for (double w : window) ola += w * w;
  ola /= static_cast<double>(cfg.hop);  // constant sum of shifted squared windows

  const RealFft fft(cfg.frame_len);
  AudioBuffer out(sample_rate, spec.channels(), length);
  std::vector<double> acc(padded);
  std::vector<cplx> bins(cfg.bins());
  std::vector<double> frame(cfg.frame_len);
  for (std::size_t m = 0; m < spec.channels(); ++m) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < bins.size(); ++f) bins[f] = spec(f, t, m);
      fft.inverse(bins, frame);
      const std::size_t start = t * cfg.hop;
      for (std::size_t i = 0; i < cfg.frame_len; ++i) acc[start + i] += frame[i] * window[i];
    }
    auto y = out.channel(m);
    for (std::size_t n = 0; n < length; ++n) y[n] = acc[lead + n] / ola;
  }
  return out;
}

}  // namespace overiva
