#pragma once

// Synthetic convolutive scenes (K speech-like targets, L white noises,
// M microphones at a prescribed SINR) and the separation metrics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "overiva/audio.hpp"
#include "overiva/rng.hpp"

namespace overiva {

struct SceneSpec {
  std::size_t speakers = 1;  // K
  std::size_t noises = 0;    // L
  std::size_t mics = 2;      // M
  double sinr_db = 0.0;
  double rt60_ms = 300.0;
  double sample_rate = 16000.0;
  double duration_s = 10.0;
  std::uint64_t seed = 0;

  std::size_t samples() const;
  void validate() const;  // throws invalid_spec
};

struct Scene {
  SceneSpec spec;
  AudioBuffer mixture;
  std::vector<AudioBuffer> target_images;
  std::vector<AudioBuffer> noise_images;  // not persisted by save_scene
};

using Fir = std::vector<double>;

// Relative amplitude of the reverberant tail at the direct-path arrival.
inline constexpr double kRirTailGain = 0.04;
inline constexpr std::size_t kMinRirTaps = 64;

std::size_t rir_length(double rt60_ms, double sample_rate);

// One FIR per channel: a unit direct-path tap at a uniform delay below 10 ms,
// followed by Gaussian taps under an exponential envelope that falls 60 dB
// over rt60.
std::vector<Fir> synth_rir(double rt60_ms, double sample_rate, std::size_t channels,
                           Xoshiro256& rng);
std::vector<Fir> synth_rir(double rt60_ms, double sample_rate, std::size_t channels,
                           std::uint64_t seed);

// Low-passed Gaussian noise under a 4 Hz syllabic envelope with random
// per-syllable gains and pauses; unit variance.
std::vector<double> speech_like_source(std::size_t samples, double sample_rate, Xoshiro256& rng);

// Linear convolution truncated to the input length.
std::vector<double> convolve(std::span<const double> signal, std::span<const double> fir);

// sources, when non-empty, replaces the built-in generator; one per speaker,
// each at least spec.samples() long.
Scene synthesize(const SceneSpec& spec, std::span<const std::vector<double>> sources = {});

double mean_square(const AudioBuffer& buf) noexcept;
// 10 log10(mean_k sigma_k^2 / sum_l sigma_l^2) from the rendered images;
// +infinity when there are no noises.
double measured_sinr_db(const Scene& scene);

void save_scene(const Scene& scene, const std::filesystem::path& dir);
Scene load_scene(const std::filesystem::path& dir);

// Scale-invariant SDR over the whole M-channel image: project the estimate on
// the reference, then 10 log10(|a ref|^2 / |a ref - est|^2), clipped to
// [-200, 200] dB.
inline constexpr double kSdrCap = 200.0;
double sdr(const AudioBuffer& reference, const AudioBuffer& estimate);

struct SdrSet {
  std::vector<double> per_source;        // indexed by reference
  std::vector<std::size_t> assignment;   // estimate index for each reference
  double mean = 0.0;
};

inline constexpr std::size_t kMaxSdrSources = 6;
// Exhaustive search over all K! pairings for the best mean SDR.
SdrSet sdr_set(std::span<const AudioBuffer> references, std::span<const AudioBuffer> estimates);

double rtf(double wall_time_s, double signal_duration_s);

}  // namespace overiva
