// Serial reference kernels against the OpenMP versions on a 10 s, 4-channel
// spectrogram (2049 bins x 160 frames).

#include <benchmark/benchmark.h>

#include <vector>

#include "overiva/exec.hpp"
#include "overiva/model.hpp"
#include "overiva/optimizer.hpp"
#include "overiva/reference.hpp"
#include "overiva/rng.hpp"

using namespace overiva;

namespace {

constexpr std::size_t kBins = 2049;
constexpr std::size_t kFrames = 160;
constexpr std::size_t kChannels = 4;

const Spectrogram& spectrogram() {
  static const Spectrogram x = [] {
    Xoshiro256 rng(1);
    Spectrogram s(kBins, kFrames, kChannels);
    for (auto& v : s.values()) v = {rng.normal(), rng.normal()};
    return s;
  }();
  return x;
}

const std::vector<double>& variances() {
  static const std::vector<double> l = [] {
    Xoshiro256 rng(2);
    std::vector<double> v(kFrames);
    for (auto& e : v) e = 0.1 + rng.uniform();
    return v;
  }();
  return l;
}

const CovarianceSet& covariances() {
  static const CovarianceSet cov = [] {
    CovarianceSet c;
    c.noise = noise_covariance(spectrogram());
    c.weighted.push_back(weighted_covariance(spectrogram(), variances(), kDefaultRidge));
    return c;
  }();
  return cov;
}

Exec threads(const benchmark::State& state) { return Exec{static_cast<int>(state.range(0))}; }

void BM_WeightedCovarianceReference(benchmark::State& state) {
  spectrogram();
  variances();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::weighted_covariance(spectrogram(), variances(), kDefaultRidge));
  }
}
BENCHMARK(BM_WeightedCovarianceReference)->Unit(benchmark::kMillisecond);

void BM_WeightedCovarianceParallel(benchmark::State& state) {
  const Exec exec = threads(state);
  spectrogram();
  variances();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        weighted_covariance(spectrogram(), variances(), kDefaultRidge, RidgeMode::absolute, exec));
  }
}
BENCHMARK(BM_WeightedCovarianceParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SweepReference(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const CovarianceSet& cov = covariances();
  for (auto _ : state) {
    DemixingStack w = DemixingStack::identity(kBins, kChannels, 1);
    reference::sweep_bins(method, w, cov);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_SweepReference)
    ->Arg(static_cast<int>(Method::ip1))
    ->Arg(static_cast<int>(Method::ip2))
    ->Unit(benchmark::kMillisecond);

void BM_SweepParallel(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const Exec exec{static_cast<int>(state.range(1))};
  const CovarianceSet& cov = covariances();
  for (auto _ : state) {
    DemixingStack w = DemixingStack::identity(kBins, kChannels, 1);
    sweep_bins(method, w, cov, exec);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_SweepParallel)
    ->ArgsProduct({{static_cast<int>(Method::ip1), static_cast<int>(Method::ip2)}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
