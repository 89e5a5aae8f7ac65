#pragma once

#include <cstdint>
#include <vector>

#include "ngmc/model.hpp"

namespace ngmc {

// Sample autocorrelation report for a scalar series.
struct AcfReport {
  std::vector<int> lags;    // 1..max_lag
  std::vector<double> acf;  // acf[k-1] is the autocorrelation at lag k
  double series_mean = 0.0;
  double series_var = 0.0;  // lag-0 autocovariance, biased 1/N normalization
  std::int64_t n_samples = 0;
};

// Scalar chain functional: squared residual norm plus the variance coordinate,
// ||Y - X beta||^2 + sigma2.
double functional_value(const ChainState& state, const Dataset& data);

std::vector<double> functional_series(const std::vector<ChainState>& states,
                                      const Dataset& data);

// Sample ACF at lags 1..max_lag with biased (1/N) covariance normalization.
// Requires series length > 3*max_lag and a nonconstant series.
AcfReport autocorrelation(const std::vector<double>& series, int max_lag);

// N / (1 + 2 * sum of acf) with the initial-positive-pair truncation rule:
// accumulate lag pairs (rho_{2m}, rho_{2m+1}) while their sum stays positive,
// capping lags at N/3. Result is clamped to at most N.
double effective_sample_size(const std::vector<double>& series);

// Standard error of the series mean from floor(sqrt(N)) nonoverlapping batches.
double batch_means_stderr(const std::vector<double>& series);

}  // namespace ngmc
