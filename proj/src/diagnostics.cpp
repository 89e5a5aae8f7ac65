#include "ngmc/diagnostics.hpp"

#include <cmath>
#include <cstddef>

#include "ngmc/errors.hpp"

namespace ngmc {

namespace {

double series_mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

bool is_constant(const std::vector<double>& x) {
  for (double v : x)
    if (v != x.front()) return false;
  return true;
}

// Biased (1/N) autocovariance at one lag, series already centered by mean.
double autocov(const std::vector<double>& x, double mean, std::size_t lag) {
  const std::size_t n = x.size();
  double s = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t)
    s += (x[t] - mean) * (x[t + lag] - mean);
  return s / static_cast<double>(n);
}

}  // namespace

double functional_value(const ChainState& state, const Dataset& data) {
  if (state.beta.size() != data.p())
    throw ConfigError("functional_value: beta length does not match dataset");
  return (data.Y - data.X * state.beta).squaredNorm() + state.sigma2;
}

std::vector<double> functional_series(const std::vector<ChainState>& states,
                                      const Dataset& data) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const ChainState& s : states) out.push_back(functional_value(s, data));
  return out;
}

AcfReport autocorrelation(const std::vector<double>& series, int max_lag) {
  if (max_lag < 1) throw ConfigError("autocorrelation: max_lag must be >= 1");
  const std::size_t n = series.size();
  if (n <= 3 * static_cast<std::size_t>(max_lag))
    throw ConfigError("autocorrelation: series length must exceed 3*max_lag");
  if (is_constant(series))
    throw NumericalError("autocorrelation: constant series has no autocorrelation");
  const double mean = series_mean_of(series);
  const double c0 = autocov(series, mean, 0);
  if (!(c0 > 0.0))
    throw NumericalError("autocorrelation: series variance underflowed");
  AcfReport rep;
  rep.lags.reserve(static_cast<std::size_t>(max_lag));
  rep.acf.reserve(static_cast<std::size_t>(max_lag));
  for (int k = 1; k <= max_lag; ++k) {
    rep.lags.push_back(k);
    rep.acf.push_back(autocov(series, mean, static_cast<std::size_t>(k)) / c0);
  }
  rep.series_mean = mean;
  rep.series_var = c0;
  rep.n_samples = static_cast<std::int64_t>(n);
  return rep;
}

double effective_sample_size(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 4) throw ConfigError("effective_sample_size: series too short");
  if (is_constant(series))
    throw NumericalError("effective_sample_size: constant series");
  const double mean = series_mean_of(series);
  const double c0 = autocov(series, mean, 0);
  if (!(c0 > 0.0))
    throw NumericalError("effective_sample_size: series variance underflowed");
  const std::size_t max_lag = n / 3;
  // Pair rule: add rho_{2m} + rho_{2m+1} while positive (rho_0 = 1 included).
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 <= max_lag; ++m) {
    const double rho_even =
        (m == 0) ? 1.0 : autocov(series, mean, 2 * m) / c0;
    const double rho_odd = autocov(series, mean, 2 * m + 1) / c0;
    const double pair = rho_even + rho_odd;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  const double nd = static_cast<double>(n);
  if (!(tau > 1.0)) return nd;  // clamp: never report more than N
  return nd / tau;
}

double batch_means_stderr(const std::vector<double>& series) {
  const std::size_t n = series.size();
  const std::size_t n_batches =
      static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  if (n_batches < 2)
    throw ConfigError("batch_means_stderr: series too short for two batches");
  const std::size_t batch = n / n_batches;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t i = 0; i < n_batches; ++i) {
    double s = 0.0;
    for (std::size_t t = i * batch; t < (i + 1) * batch; ++t) s += series[t];
    means[i] = s / static_cast<double>(batch);
  }
  const double grand = series_mean_of(means);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_means = ss / static_cast<double>(n_batches - 1);
  return std::sqrt(var_means / static_cast<double>(n_batches));
}

}  // namespace ngmc
