#pragma once

// Time-domain front end: STFT, separation, projection back, inverse STFT.

#include <cstddef>
#include <vector>

#include "overiva/audio.hpp"
#include "overiva/optimizer.hpp"
#include "overiva/simulate.hpp"
#include "overiva/stft.hpp"

namespace overiva {

// Samples in [-1, 1] are analysed in 16-bit integer units, the scale at which
// the default ridge eps2 = 0.1 is a light diagonal loading.
inline constexpr double kAmplitudeScale = 32768.0;

struct AudioSeparation {
  SeparationResult result;
  std::vector<AudioBuffer> images;  // M-channel spatial images, input length
};

AudioSeparation separate_audio(const AudioBuffer& mixture, std::size_t targets,
                               const RunConfig& cfg, const StftConfig& stft_cfg = {});

struct TrialScore {
  double sdr = 0.0;  // best-permutation mean over targets
  double rtf = 0.0;
};

// Mean SDR of the unprocessed mixture against every target image.
double mixture_sdr(const Scene& scene);

TrialScore score_method(const Scene& scene, const RunConfig& cfg, const StftConfig& stft_cfg = {});

}  // namespace overiva
