#include "overiva/pipeline.hpp"

namespace overiva {

AudioSeparation separate_audio(const AudioBuffer& mixture, std::size_t targets,
                               const RunConfig& cfg, const StftConfig& stft_cfg) {
  AudioBuffer scaled = mixture;
  for (auto& v : scaled.samples) v *= kAmplitudeScale;
  const Spectrogram x = stft(scaled, stft_cfg);

  AudioSeparation out;
  out.result = run(x, targets, cfg);
  for (const auto& img : out.result.images) {
    AudioBuffer y = istft(img, stft_cfg, mixture.frames, mixture.sample_rate);
    for (auto& v : y.samples) v /= kAmplitudeScale;
    out.images.push_back(std::move(y));
  }
  return out;
}

double mixture_sdr(const Scene& scene) {
  double acc = 0.0;
  for (const auto& img : scene.target_images) acc += sdr(img, scene.mixture);
  return acc / static_cast<double>(scene.target_images.size());
}

TrialScore score_method(const Scene& scene, const RunConfig& cfg, const StftConfig& stft_cfg) {
  const auto sep = separate_audio(scene.mixture, scene.spec.speakers, cfg, stft_cfg);
  TrialScore score;
  score.sdr = sdr_set(scene.target_images, sep.images).mean;
  score.rtf = rtf(sep.result.wall_time, scene.mixture.duration());
  return score;
}

}  // namespace overiva
