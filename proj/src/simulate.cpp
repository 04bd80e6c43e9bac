#include "overiva/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <json.hpp>

#include "overiva/error.hpp"
#include "overiva/fft.hpp"
#include "overiva/wav.hpp"

namespace overiva {

namespace {

constexpr double kPeakLevel = 0.9;

std::size_t fft_size_for(std::size_t n) {
  std::size_t p = 2;
  while (p < n) p <<= 1;
  return p;
}

AudioBuffer render_image(std::span<const double> source, const std::vector<Fir>& rir,
                         double rate) {
  AudioBuffer img(rate, rir.size(), source.size());
  for (std::size_t c = 0; c < rir.size(); ++c) {
    const auto y = convolve(source, rir[c]);
    std::copy(y.begin(), y.end(), img.channel(c).begin());
  }
  return img;
}

void scale(AudioBuffer& buf, double g) {
  for (auto& v : buf.samples) v *= g;
}

double peak(const AudioBuffer& buf) {
  double p = 0.0;
  for (double v : buf.samples) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace

std::size_t SceneSpec::samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

void SceneSpec::validate() const {
  if (speakers < 1) throw Error(Errc::invalid_spec, "need at least one speaker");
  if (mics < speakers + 1) throw Error(Errc::invalid_spec, "need M >= K + 1 microphones");
  if (!(duration_s > 0.0)) throw Error(Errc::invalid_spec, "duration must be positive");
  if (!(sample_rate > 0.0)) throw Error(Errc::invalid_spec, "sample rate must be positive");
  if (!(rt60_ms > 0.0)) throw Error(Errc::invalid_spec, "rt60 must be positive");
  if (!std::isfinite(sinr_db)) throw Error(Errc::invalid_spec, "SINR must be finite");
  if (samples() < 1) throw Error(Errc::invalid_spec, "duration shorter than one sample");
}

std::size_t rir_length(double rt60_ms, double sample_rate) {
  const auto n = static_cast<std::size_t>(std::llround(3.0 * rt60_ms * 1e-3 * sample_rate));
  return std::max(n, kMinRirTaps);
}

std::vector<Fir> synth_rir(double rt60_ms, double sample_rate, std::size_t channels,
                           Xoshiro256& rng) {
  if (!(rt60_ms > 0.0)) throw Error(Errc::invalid_spec, "rt60 must be positive");
  const std::size_t len = rir_length(rt60_ms, sample_rate);
  const double n60 = rt60_ms * 1e-3 * sample_rate;
  const double decay = std::log(1e-3) / n60;  // amplitude: -60 dB at n60
  const auto max_delay = static_cast<std::uint64_t>(
      std::min<double>(std::ceil(0.01 * sample_rate), static_cast<double>(len)));

  std::vector<Fir> out(channels, Fir(len, 0.0));
  for (auto& h : out) {
    const std::size_t d = static_cast<std::size_t>(rng.below(max_delay));
    h[d] = 1.0;
    for (std::size_t n = d + 1; n < len; ++n) {
      h[n] = kRirTailGain * std::exp(decay * static_cast<double>(n - d)) * rng.normal();
    }
  }
  return out;
}

std::vector<Fir> synth_rir(double rt60_ms, double sample_rate, std::size_t channels,
                           std::uint64_t seed) {
  Xoshiro256 rng(seed);
  return synth_rir(rt60_ms, sample_rate, channels, rng);
}

std::vector<double> speech_like_source(std::size_t samples, double sample_rate,
                                       Xoshiro256& rng) {
  constexpr double kSyllableRate = 4.0;
  constexpr double kPauseProbability = 0.25;
  constexpr double kPole = 0.7;

  const double per_syllable = sample_rate / kSyllableRate;
  const double offset = rng.uniform() * per_syllable;
  const std::size_t syllables =
      static_cast<std::size_t>((static_cast<double>(samples) + offset) / per_syllable) + 2;
  std::vector<double> gains(syllables);
  for (auto& g : gains) {
    g = rng.uniform() < kPauseProbability ? 0.0 : 0.3 + 0.7 * rng.uniform();
  }

  std::vector<double> y(samples);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    s1 = rng.normal() + kPole * s1;
    s2 = s1 + kPole * s2;
    const double pos = (static_cast<double>(n) + offset) / per_syllable;
    const auto j = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(j);
    const double env = gains[j] * std::pow(std::sin(std::numbers::pi * frac), 2);
    y[n] = env * s2;
  }
  double ms = 0.0;
  for (double v : y) ms += v * v;
  ms /= static_cast<double>(samples);
  if (ms > 0.0) {
    const double g = 1.0 / std::sqrt(ms);
    for (auto& v : y) v *= g;
  }
  return y;
}

std::vector<double> convolve(std::span<const double> signal, std::span<const double> fir) {
  const std::size_t n = signal.size();
  if (n == 0 || fir.empty()) return std::vector<double>(n, 0.0);
  const std::size_t size = fft_size_for(n + fir.size() - 1);
  const RealFft fft(size);
  std::vector<double> a(size, 0.0), b(size, 0.0);
  std::copy(signal.begin(), signal.end(), a.begin());
  std::copy(fir.begin(), fir.end(), b.begin());
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  fft.inverse(fa, a);
  a.resize(n);
  return a;
}

Scene synthesize(const SceneSpec& spec, std::span<const std::vector<double>> sources) {
  spec.validate();
  const std::size_t n = spec.samples();
  if (!sources.empty() && sources.size() != spec.speakers) {
    throw Error(Errc::invalid_spec, "expected one source signal per speaker");
  }
  Xoshiro256 rng(spec.seed);

  Scene scene;
  scene.spec = spec;
  for (std::size_t k = 0; k < spec.speakers; ++k) {
    std::vector<double> src;
    if (sources.empty()) {
      src = speech_like_source(n, spec.sample_rate, rng);
    } else {
      if (sources[k].size() < n) throw Error(Errc::invalid_spec, "source signal too short");
      src.assign(sources[k].begin(), sources[k].begin() + static_cast<std::ptrdiff_t>(n));
      double ms = 0.0;
      for (double v : src) ms += v * v;
      if (!(ms > 0.0)) throw Error(Errc::invalid_spec, "source signal is silent");
      const double g = 1.0 / std::sqrt(ms / static_cast<double>(n));
      for (auto& v : src) v *= g;
    }
    const auto rir = synth_rir(spec.rt60_ms, spec.sample_rate, spec.mics, rng);
    scene.target_images.push_back(render_image(src, rir, spec.sample_rate));
  }
  for (std::size_t l = 0; l < spec.noises; ++l) {
    std::vector<double> src(n);
    for (auto& v : src) v = rng.normal();
    const auto rir = synth_rir(spec.rt60_ms, spec.sample_rate, spec.mics, rng);
    scene.noise_images.push_back(render_image(src, rir, spec.sample_rate));
  }

  if (spec.noises > 0) {
    double target = 0.0, noise = 0.0;
    for (const auto& img : scene.target_images) target += mean_square(img);
    for (const auto& img : scene.noise_images) noise += mean_square(img);
    target /= static_cast<double>(spec.speakers);
    const double g = std::sqrt(target / (noise * std::pow(10.0, spec.sinr_db / 10.0)));
    for (auto& img : scene.noise_images) scale(img, g);
  }

  AudioBuffer mix(spec.sample_rate, spec.mics, n);
  for (const auto& img : scene.target_images) {
    for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] += img.samples[i];
  }
  for (const auto& img : scene.noise_images) {
    for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] += img.samples[i];
  }
  double p = peak(mix);
  for (const auto& img : scene.target_images) p = std::max(p, peak(img));
  for (const auto& img : scene.noise_images) p = std::max(p, peak(img));

  // One common gain on every image, then the mixture is summed once so that
  // additivity holds bit-exactly.
  const double g = p > 0.0 ? kPeakLevel / p : 1.0;
  for (auto& img : scene.target_images) scale(img, g);
  for (auto& img : scene.noise_images) scale(img, g);
  std::fill(mix.samples.begin(), mix.samples.end(), 0.0);
  for (const auto& img : scene.target_images) {
    for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] += img.samples[i];
  }
  for (const auto& img : scene.noise_images) {
    for (std::size_t i = 0; i < mix.samples.size(); ++i) mix.samples[i] += img.samples[i];
  }
  scene.mixture = std::move(mix);
  return scene;
}

double mean_square(const AudioBuffer& buf) noexcept {
  if (buf.samples.empty()) return 0.0;
  double s = 0.0;
  for (double v : buf.samples) s += v * v;
  return s / static_cast<double>(buf.samples.size());
}

double measured_sinr_db(const Scene& scene) {
  if (scene.noise_images.empty()) return std::numeric_limits<double>::infinity();
  double target = 0.0, noise = 0.0;
  for (const auto& img : scene.target_images) target += mean_square(img);
  for (const auto& img : scene.noise_images) noise += mean_square(img);
  target /= static_cast<double>(scene.target_images.size());
  return 10.0 * std::log10(target / noise);
}

void save_scene(const Scene& scene, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_failure, "cannot create " + dir.string());
  write_wav(dir / "mixture.wav", scene.mixture, WavFormat::float32);
  for (std::size_t k = 0; k < scene.target_images.size(); ++k) {
    write_wav(dir / ("target_" + std::to_string(k + 1) + ".wav"), scene.target_images[k],
              WavFormat::float32);
  }
  const SceneSpec& s = scene.spec;
  nlohmann::ordered_json j;
  j["speakers"] = s.speakers;
  j["noises"] = s.noises;
  j["mics"] = s.mics;
  j["sinr_db"] = s.sinr_db;
  j["rt60_ms"] = s.rt60_ms;
  j["sample_rate"] = s.sample_rate;
  j["duration_s"] = s.duration_s;
  j["seed"] = s.seed;
  j["prng"] = std::string(Xoshiro256::kName);
  std::ofstream out(dir / "spec.json");
  if (!out) throw Error(Errc::io_failure, "cannot write spec.json");
  out << j.dump(2) << '\n';
}

Scene load_scene(const std::filesystem::path& dir) {
  std::ifstream in(dir / "spec.json");
  if (!in) throw Error(Errc::io_failure, "cannot read " + (dir / "spec.json").string());
  Scene scene;
  try {
    const auto j = nlohmann::json::parse(in);
    SceneSpec& s = scene.spec;
    s.speakers = j.at("speakers").get<std::size_t>();
    s.noises = j.at("noises").get<std::size_t>();
    s.mics = j.at("mics").get<std::size_t>();
    s.sinr_db = j.at("sinr_db").get<double>();
    s.rt60_ms = j.at("rt60_ms").get<double>();
    s.sample_rate = j.at("sample_rate").get<double>();
    s.duration_s = j.at("duration_s").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_file, std::string("spec.json: ") + e.what());
  }
  scene.mixture = read_wav(dir / "mixture.wav");
  for (std::size_t k = 0; k < scene.spec.speakers; ++k) {
    scene.target_images.push_back(read_wav(dir / ("target_" + std::to_string(k + 1) + ".wav")));
  }
  return scene;
}

double sdr(const AudioBuffer& reference, const AudioBuffer& estimate) {
  if (reference.samples.size() != estimate.samples.size()) {
    throw Error(Errc::shape_mismatch, "sdr: reference and estimate differ in size");
  }
  double rr = 0.0, re = 0.0;
  for (std::size_t i = 0; i < reference.samples.size(); ++i) {
    rr += reference.samples[i] * reference.samples[i];
    re += reference.samples[i] * estimate.samples[i];
  }
  if (!(rr > 0.0)) throw Error(Errc::zero_reference, "sdr: reference has no energy");
  const double alpha = re / rr;
  double target = 0.0, err = 0.0;
  for (std::size_t i = 0; i < reference.samples.size(); ++i) {
    const double t = alpha * reference.samples[i];
    const double d = t - estimate.samples[i];
    target += t * t;
    err += d * d;
  }
  if (err == 0.0) return target > 0.0 ? kSdrCap : -kSdrCap;
  if (target == 0.0) return -kSdrCap;
  return std::clamp(10.0 * std::log10(target / err), -kSdrCap, kSdrCap);
}

SdrSet sdr_set(std::span<const AudioBuffer> references, std::span<const AudioBuffer> estimates) {
  const std::size_t k = references.size();
  if (k > kMaxSdrSources) throw Error(Errc::too_many_sources, "sdr_set supports K <= 6");
  if (estimates.size() != k) throw Error(Errc::shape_mismatch, "sdr_set: count mismatch");

  std::vector<double> table(k * k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t e = 0; e < k; ++e) table[r * k + e] = sdr(references[r], estimates[e]);
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  SdrSet best;
  best.mean = -std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t r = 0; r < k; ++r) sum += table[r * k + perm[r]];
    const double mean = k > 0 ? sum / static_cast<double>(k) : 0.0;
    if (mean > best.mean) {
      best.mean = mean;
      best.assignment = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.per_source.resize(k);
  for (std::size_t r = 0; r < k; ++r) best.per_source[r] = table[r * k + best.assignment[r]];
  return best;
}

double rtf(double wall_time_s, double signal_duration_s) {
  if (!(signal_duration_s > 0.0)) throw Error(Errc::invalid_argument, "duration must be positive");
  return wall_time_s / signal_duration_s;
}

}  // namespace overiva
