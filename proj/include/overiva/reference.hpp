#pragma once

// Serial reference versions of the per-frequency kernels. Plain loops, plain
// summation, no OpenMP. Kept to cross-check the parallel kernels and as the
// baseline in the kernel benchmark.

#include <span>
#include <vector>

#include "overiva/model.hpp"
#include "overiva/optimizer.hpp"

namespace overiva::reference {

std::vector<CMatrix> noise_covariance(const Spectrogram& x);
std::vector<CMatrix> weighted_covariance(const Spectrogram& x, std::span<const double> lambda_k,
                                         double ridge);
TargetSpectra separate(const DemixingStack& w, const Spectrogram& x, std::size_t sources);
double cost_total(const DemixingStack& w, const VarianceMap& lambda, const Spectrogram& x);
void sweep_bins(Method method, DemixingStack& w, const CovarianceSet& cov,
                WzUpdate mode = WzUpdate::fast);

}  // namespace overiva::reference
