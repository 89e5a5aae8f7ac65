#include "ngmc/gammainc.hpp"

#include <cmath>
#include <limits>

#include "ngmc/errors.hpp"

namespace ngmc {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 600;

// Series for the lower integral, reliable for x < s + 1:
//   gamma(s,x) = x^s e^-x * (1/s) * (1 + x/(s+1) + x^2/((s+1)(s+2)) + ...)
double log_lower_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double denom = s;
  for (int n = 1; n < kMaxIter; ++n) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (term < sum * kEps) break;
  }
  return s * std::log(x) - x + std::log(sum);
}

// Lentz continued fraction for the upper integral, reliable for x >= s + 1
// (and for any s once x is not small):
//   Gamma(s,x) = x^s e^-x / (x+1-s - 1(1-s)/(x+3-s - 2(2-s)/(...)))
double log_upper_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return s * std::log(x) - x + std::log(h);
}

}  // namespace

double log_lower_gamma(double s, double x) {
  if (!(s > 0.0) || x < 0.0 || !std::isfinite(s) || !std::isfinite(x)) {
    throw NumericalError("log_lower_gamma: requires s > 0 and x >= 0");
  }
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x < s + 1.0) return log_lower_series(s, x);
  // gamma = Gamma(s) - Gamma(s,x), with Gamma(s,x) the smaller piece here.
  const double lg = std::lgamma(s);
  const double lu = log_upper_cf(s, x);
  return lg + std::log1p(-std::exp(lu - lg));
}

double log_upper_gamma(double s, double x) {
  if (!(x > 0.0) || !std::isfinite(s) || !std::isfinite(x)) {
    throw NumericalError("log_upper_gamma: requires x > 0");
  }
  if (x >= s + 1.0 && x >= 1.0) return log_upper_cf(s, x);
  if (s > 0.0) {
    // Complement of the series branch.
    const double lg = std::lgamma(s);
    const double ll = log_lower_series(s, x);
    if (ll >= lg) return -std::numeric_limits<double>::infinity();
    return lg + std::log1p(-std::exp(ll - lg));
  }
  // s <= 0, small x: walk down from an order t0 in [0, 1) using
  //   Gamma(t-1, x) = (x^(t-1) e^-x - Gamma(t, x)) / (1 - t)
  // in the scaled variable g_t = Gamma(t,x) / (x^t e^-x):
  //   g_{t-1} = (1 - x g_t) / (1 - t),
  // which keeps everything positive and modest for x < 1.  Integer s seeds
  // at t0 = 0 with the exponential integral E1; otherwise t0 = s - floor(s).
  double t0 = s - std::floor(s);
  double g;
  if (t0 == 0.0) {
    // E1(x) = -euler - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k k!)
    constexpr double kEuler = 0.5772156649015328606;
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < kMaxIter; ++k) {
      term *= -x / k;
      const double add = -term / k;
      sum += add;
      if (std::abs(add) < kEps * (std::abs(sum) + 1.0)) break;
    }
    const double e1 = -kEuler - std::log(x) + sum;
    g = e1 * std::exp(x);  // Gamma(0,x) / (x^0 e^-x)
  } else {
    g = std::exp(log_upper_gamma(t0, x) - (t0 * std::log(x) - x));
  }
  const int steps = static_cast<int>(std::llround(t0 - s));
  double t = t0;
  for (int k = 0; k < steps; ++k) {
    g = (1.0 - x * g) / (1.0 - t);
    t -= 1.0;
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw NumericalError("log_upper_gamma: downward recurrence failed");
    }
  }
  return std::log(g) + s * std::log(x) - x;
}

double reg_lower_gamma(double s, double x) {
  if (x <= 0.0) return 0.0;
  const double v = log_lower_gamma(s, x) - std::lgamma(s);
  return v >= 0.0 ? 1.0 : std::exp(v);
}

}  // namespace ngmc
