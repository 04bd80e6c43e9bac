#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "overiva/error.hpp"
#include "overiva/pipeline.hpp"
#include "overiva/simulate.hpp"

using namespace overiva;

namespace {

constexpr double kSinrTol = 0.01;  // dB

AudioBuffer noise_like(const AudioBuffer& ref, double power, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  AudioBuffer n = ref;
  for (auto& v : n.samples) v = rng.normal();
  // Remove the component along ref, then scale to the requested power.
  double rr = 0.0, rn = 0.0;
  for (std::size_t i = 0; i < ref.samples.size(); ++i) {
    rr += ref.samples[i] * ref.samples[i];
    rn += ref.samples[i] * n.samples[i];
  }
  for (std::size_t i = 0; i < ref.samples.size(); ++i) n.samples[i] -= rn / rr * ref.samples[i];
  const double g = std::sqrt(power * rr / (mean_square(n) * static_cast<double>(n.samples.size())));
  for (auto& v : n.samples) v *= g;
  return n;
}

AudioBuffer random_buffer(std::size_t ch, std::size_t n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  AudioBuffer b(16000.0, ch, n);
  for (auto& v : b.samples) v = rng.normal();
  return b;
}

SceneSpec small_spec() {
  SceneSpec s;
  s.speakers = 1;
  s.noises = 1;
  s.mics = 3;
  s.duration_s = 1.0;
  s.rt60_ms = 100.0;
  s.seed = 7;
  return s;
}

}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("xoshiro256** reference stream") {
    // splitmix64(0) seeding, first outputs checked against an independent
    // transcription of the published algorithm.
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    std::uint64_t sm = 0;
    auto splitmix = [&]() {
      std::uint64_t z = (sm += 0x9e3779b97f4a7c15ULL);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    std::uint64_t s[4] = {splitmix(), splitmix(), splitmix(), splitmix()};
    Xoshiro256 rng(0);
    for (int i = 0; i < 100; ++i) {
      const std::uint64_t expect = rotl(s[1] * 5, 7) * 9;
      const std::uint64_t t = s[1] << 17;
      s[2] ^= s[0];
      s[3] ^= s[1];
      s[1] ^= s[2];
      s[0] ^= s[3];
      s[2] ^= t;
      s[3] = rotl(s[3], 45);
      CHECK(rng.next() == expect);
    }
  }

  TEST_CASE("normal draws have unit variance") {
    Xoshiro256 rng(3);
    double m = 0.0, v = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double x = rng.normal();
      m += x;
      v += x * x;
    }
    CHECK(std::abs(m / n) < 0.01);
    CHECK(std::abs(v / n - 1.0) < 0.02);
    for (int i = 0; i < 1000; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(rng.below(7) < 7);
    }
  }

  TEST_CASE("spec validation") {
    SceneSpec s = small_spec();
    CHECK_NOTHROW(s.validate());
    s.mics = 1;
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_spec();
    s.speakers = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_spec();
    s.duration_s = 0.0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = small_spec();
    s.rt60_ms = -1.0;
    CHECK_THROWS_AS(synthesize(s), Error);
  }

  TEST_CASE("RIR length, direct path and decay") {
    CHECK(rir_length(300.0, 16000.0) == 14400);
    CHECK(rir_length(0.001, 16000.0) == kMinRirTaps);
    const auto h = synth_rir(300.0, 16000.0, 4, std::uint64_t{5});
    REQUIRE(h.size() == 4);
    for (const auto& ch : h) {
      REQUIRE(ch.size() == 14400);
      std::size_t d = 0;
      while (ch[d] == 0.0) ++d;
      CHECK(d < 160);
      CHECK(ch[d] == 1.0);
      // Least-squares line through log energy of 200-tap blocks after the
      // direct path; the slope gives the level at 4800 taps.
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      int count = 0;
      for (std::size_t b = d + 1; b + 200 <= d + 9600; b += 200) {
        double e = 0.0;
        for (std::size_t n = b; n < b + 200; ++n) e += ch[n] * ch[n];
        const double x = static_cast<double>(b + 100 - d);
        const double y = 10.0 * std::log10(e / 200.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
      }
      const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
      CHECK(slope * 4800.0 == doctest::Approx(-60.0).epsilon(1.0 / 60.0));
    }
    const auto again = synth_rir(300.0, 16000.0, 4, std::uint64_t{5});
    CHECK(again == h);
    const auto tiny = synth_rir(0.001, 16000.0, 2, std::uint64_t{5});
    CHECK(tiny[0].size() == kMinRirTaps);
  }

  TEST_CASE("convolution matches direct summation") {
    const std::vector<double> x{1.0, 2.0, -1.0, 0.5, 3.0};
    const std::vector<double> h{0.5, -1.0, 0.25};
    const auto y = convolve(x, h);
    REQUIRE(y.size() == x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k < h.size() && k <= n; ++k) acc += h[k] * x[n - k];
      CHECK(y[n] == doctest::Approx(acc).epsilon(1e-12));
    }
  }

  TEST_CASE("speech-like source is unit variance and nonstationary") {
    Xoshiro256 rng(9);
    const auto s = speech_like_source(32000, 16000.0, rng);
    double ms = 0.0;
    for (double v : s) ms += v * v;
    CHECK(ms / 32000.0 == doctest::Approx(1.0).epsilon(1e-12));
    double lo = 1e300, hi = 0.0;
    for (std::size_t b = 0; b + 1600 <= s.size(); b += 1600) {
      double e = 0.0;
      for (std::size_t n = b; n < b + 1600; ++n) e += s[n] * s[n];
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    CHECK(hi > 10.0 * lo);
  }

  TEST_CASE("scene without noise is the exact sum of target images") {
    SceneSpec s = small_spec();
    s.speakers = 2;
    s.noises = 0;
    const Scene scene = synthesize(s);
    CHECK(std::isinf(measured_sinr_db(scene)));
    for (std::size_t i = 0; i < scene.mixture.samples.size(); ++i) {
      CHECK(scene.mixture.samples[i] == scene.target_images[0].samples[i] + scene.target_images[1].samples[i]);
    }
  }

  TEST_CASE("scene additivity with noise") {
    SceneSpec s = small_spec();
    s.noises = 2;
    const Scene scene = synthesize(s);
    for (std::size_t i = 0; i < scene.mixture.samples.size(); ++i) {
      double acc = 0.0;
      for (const auto& img : scene.target_images) acc += img.samples[i];
      for (const auto& img : scene.noise_images) acc += img.samples[i];
      CHECK(scene.mixture.samples[i] == acc);
    }
  }

  TEST_CASE("realized SINR") {
    for (double sinr : {-5.0, 0.0, 10.0}) {
      SceneSpec s = small_spec();
      s.speakers = 2;
      s.noises = 3;
      s.mics = 4;
      s.sinr_db = sinr;
      const Scene scene = synthesize(s);
      CHECK(std::abs(measured_sinr_db(scene) - sinr) <= kSinrTol);
    }
    const Scene one = synthesize(small_spec());
    const double ratio = mean_square(one.target_images[0]) / mean_square(one.noise_images[0]);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.002));
  }

  TEST_CASE("scene peak stays below full scale") {
    const Scene scene = synthesize(small_spec());
    double p = 0.0;
    for (double v : scene.mixture.samples) p = std::max(p, std::abs(v));
    CHECK(p <= 0.9 + 1e-12);
  }

  TEST_CASE("same seed gives a bit-identical scene") {
    const Scene a = synthesize(small_spec());
    const Scene b = synthesize(small_spec());
    CHECK(a.mixture.samples == b.mixture.samples);
    CHECK(a.target_images[0].samples == b.target_images[0].samples);
    SceneSpec other = small_spec();
    other.seed = 8;
    CHECK(synthesize(other).mixture.samples != a.mixture.samples);
  }

  TEST_CASE("external sources replace the generator") {
    SceneSpec s = small_spec();
    std::vector<std::vector<double>> src(1, std::vector<double>(s.samples() + 10));
    for (std::size_t n = 0; n < src[0].size(); ++n) src[0][n] = std::sin(0.01 * static_cast<double>(n));
    CHECK_NOTHROW(synthesize(s, src));
    src[0].resize(10);
    CHECK_THROWS_AS(synthesize(s, src), Error);
  }

  TEST_CASE("scene save and load round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "overiva_scene_test";
    std::filesystem::remove_all(dir);
    const Scene scene = synthesize(small_spec());
    save_scene(scene, dir);
    CHECK(std::filesystem::exists(dir / "mixture.wav"));
    CHECK(std::filesystem::exists(dir / "target_1.wav"));
    std::ifstream in(dir / "spec.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("prng").get<std::string>() == "xoshiro256**");
    CHECK(j.at("mics").get<int>() == 3);
    const Scene back = load_scene(dir);
    CHECK(back.spec.seed == scene.spec.seed);
    CHECK(back.spec.sinr_db == scene.spec.sinr_db);
    REQUIRE(back.mixture.samples.size() == scene.mixture.samples.size());
    for (std::size_t i = 0; i < back.mixture.samples.size(); ++i) {
      CHECK(back.mixture.samples[i] == static_cast<double>(static_cast<float>(scene.mixture.samples[i])));
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("SDR closed forms") {
    const AudioBuffer ref = random_buffer(2, 4000, 11);
    CHECK(sdr(ref, ref) == kSdrCap);
    AudioBuffer half = ref;
    for (auto& v : half.samples) v *= 0.5;
    CHECK(sdr(ref, half) == kSdrCap);
    const AudioBuffer n = noise_like(ref, 0.1, 12);
    AudioBuffer est = ref;
    for (std::size_t i = 0; i < est.samples.size(); ++i) est.samples[i] += n.samples[i];
    CHECK(sdr(ref, est) == doctest::Approx(10.0).epsilon(0.01));
    CHECK(sdr(ref, AudioBuffer(16000.0, 2, 4000)) == -kSdrCap);
    CHECK_THROWS_AS(sdr(AudioBuffer(16000.0, 2, 4000), ref), Error);
    CHECK_THROWS_AS(sdr(ref, AudioBuffer(16000.0, 2, 10)), Error);
  }

  TEST_CASE("SDR is gain invariant and decreases with added noise") {
    const AudioBuffer ref = random_buffer(1, 3000, 13);
    double prev = kSdrCap;
    for (double p : {0.01, 0.1, 1.0, 10.0}) {
      const AudioBuffer n = noise_like(ref, p, 14);
      AudioBuffer est = ref;
      for (std::size_t i = 0; i < est.samples.size(); ++i) est.samples[i] += n.samples[i];
      const double d = sdr(ref, est);
      CHECK(d < prev);
      prev = d;
      AudioBuffer louder = est;
      for (auto& v : louder.samples) v *= -3.0;
      CHECK(sdr(ref, louder) == doctest::Approx(d).epsilon(1e-12));
    }
  }

  TEST_CASE("sdr_set resolves the permutation") {
    const AudioBuffer a = random_buffer(2, 2000, 15);
    const AudioBuffer b = random_buffer(2, 2000, 16);
    const std::vector<AudioBuffer> refs{a, b};
    const auto straight = sdr_set(refs, std::vector<AudioBuffer>{a, b});
    const auto swapped = sdr_set(refs, std::vector<AudioBuffer>{b, a});
    CHECK(straight.mean == swapped.mean);
    CHECK(swapped.assignment == std::vector<std::size_t>{1, 0});
    CHECK(sdr_set(std::vector<AudioBuffer>{a}, std::vector<AudioBuffer>{a}).per_source.size() == 1);
    CHECK_THROWS_AS(sdr_set(std::vector<AudioBuffer>(7, a), std::vector<AudioBuffer>(7, a)), Error);
  }

  TEST_CASE("real-time factor") {
    CHECK(rtf(2.6, 10.0) == doctest::Approx(0.26));
    CHECK(rtf(0.0, 10.0) == 0.0);
    CHECK(rtf(10.0, 10.0) == 1.0);
    CHECK_THROWS_AS(rtf(1.0, 0.0), Error);
  }

  TEST_CASE("mixture SDR at 0 dB SINR is near 0 dB") {
    SceneSpec s = small_spec();
    s.noises = 2;
    s.mics = 4;
    CHECK(std::abs(mixture_sdr(synthesize(s))) < 0.5);
  }

  TEST_CASE("every method improves on a K=1, L=1, M=3 scene") {
    SceneSpec s;
    s.speakers = 1;
    s.noises = 1;
    s.mics = 3;
    s.duration_s = 5.0;
    s.seed = 3;
    const Scene scene = synthesize(s);
    const double mix = mixture_sdr(scene);
    for (Method m : {Method::auxiva, Method::ip1, Method::ip2, Method::ip3}) {
      RunConfig cfg;
      cfg.method = m;
      cfg.iterations = default_iterations(m);
      cfg.record_cost = false;
      const TrialScore score = score_method(scene, cfg);
      CHECK_MESSAGE(score.sdr - mix >= 5.0, to_string(m));
    }
  }
}
