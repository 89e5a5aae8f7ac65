#include "ngmc/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ngmc/bessel.hpp"
#include "ngmc/errors.hpp"

namespace ngmc {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kLn2 = 0.69314718055994530942;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of the standard two-parameter kernel z^(lambda-1) exp(-w/2 (z + 1/z)).
double log_kernel(double z, double lambda, double w) {
  return (lambda - 1.0) * std::log(z) - 0.5 * w * (z + 1.0 / z);
}

double standard_mode(double lambda, double w) {
  if (lambda >= 1.0) {
    return ((lambda - 1.0) +
            std::sqrt((lambda - 1.0) * (lambda - 1.0) + w * w)) /
           w;
  }
  // Rationalised so it stays accurate as w -> 0 with lambda < 1.
  return w / ((1.0 - lambda) +
              std::sqrt((1.0 - lambda) * (1.0 - lambda) + w * w));
}

// Ratio-of-uniforms with the region relocated to the mode.  The u-extent on
// each side is attained at a stationary point of (x - m)^2 f(x); those are
// the two positive roots of a cubic, obtained in closed (trigonometric)
// form.  Used for lambda >= 1 or w > 1.
double gig_rou_shift(RngStream& rng, double lambda, double w) {
  const double m = standard_mode(lambda, w);
  const double log_fm = log_kernel(m, lambda, w);
  const double a = -(2.0 * (lambda + 1.0) / w + m);
  const double b = 2.0 * (lambda - 1.0) * m / w - 1.0;
  const double c = m;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double arg =
      std::clamp(-q / (2.0 * std::sqrt(-p * p * p / 27.0)), -1.0, 1.0);
  const double fi = std::acos(arg);
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y_hi = fak * std::cos(fi / 3.0) - a / 3.0;  // > m
  const double y_lo =
      fak * std::cos(fi / 3.0 + 4.0 * kPi / 3.0) - a / 3.0;  // in (0, m)
  // Tiny inflation absorbs roundoff in the closed-form roots, keeping the
  // enclosing box a true superset of the acceptance region.
  const double pad = 1.0 + 1e-10;
  const double u_hi = pad * (y_hi - m) *
                      std::exp(0.5 * (log_kernel(y_hi, lambda, w) - log_fm));
  const double u_lo = pad * (y_lo - m) *
                      std::exp(0.5 * (log_kernel(y_lo, lambda, w) - log_fm));
  while (true) {
    const double u = u_lo + rng.uniform() * (u_hi - u_lo);
    const double v = rng.uniform();
    const double x = u / v + m;
    if (x <= 0.0) continue;
    if (2.0 * std::log(v) <= log_kernel(x, lambda, w) - log_fm) return x;
  }
}

// Plain ratio-of-uniforms; valid for 0 <= lambda < 1 with moderate w.
double gig_rou_noshift(RngStream& rng, double lambda, double w) {
  const double m = standard_mode(lambda, w);
  const double log_fm = log_kernel(m, lambda, w);
  const double ym =
      ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + w * w)) /
      w;
  const double um = (1.0 + 1e-10) * ym *
                    std::exp(0.5 * (log_kernel(ym, lambda, w) - log_fm));
  while (true) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (2.0 * std::log(v) <= log_kernel(x, lambda, w) - log_fm) return x;
  }
}

// Three-piece composition-rejection for 0 <= lambda < 1 and small w, where
// the density concentrates near zero and develops a heavy power-law body:
// a flat cap over (0, x0], the bound x^(lambda-1) e^-w over (x0, 2/w] (the
// exponential factor is at most e^-w there), and an exponential tail.
double gig_composition(RngStream& rng, double lambda, double w) {
  const double m = standard_mode(lambda, w);
  const double log_fm = log_kernel(m, lambda, w);
  const double x0 = w / (1.0 - lambda);
  const double s3 = std::max(x0, 2.0 / w);
  const double big_l = std::log(2.0 / (w * x0));  // > 0 in this regime

  const double log_a0 = log_fm + std::log(x0);
  const double log_a1 =
      (lambda > 0.0)
          ? -w + lambda * std::log(x0) +
                std::log(std::expm1(lambda * big_l) / lambda)
          : -w + std::log(big_l);
  const double log_a2 =
      (lambda - 1.0) * std::log(s3) + std::log(2.0 / w) - 0.5 * w * s3;

  const double top = std::max({log_a0, log_a1, log_a2});
  const double w0 = std::exp(log_a0 - top);
  const double w1 = std::exp(log_a1 - top);
  const double w2 = std::exp(log_a2 - top);
  const double total = w0 + w1 + w2;

  while (true) {
    const double pick = rng.uniform() * total;
    const double u = rng.uniform();
    const double v = rng.uniform();
    double x, log_hat;
    if (pick < w0) {
      x = u * x0;
      log_hat = log_fm;
    } else if (pick < w0 + w1) {
      x = (lambda > 0.0)
              ? x0 * std::exp(std::log1p(u * std::expm1(lambda * big_l)) /
                              lambda)
              : x0 * std::exp(u * big_l);
      log_hat = -w + (lambda - 1.0) * std::log(x);
    } else {
      x = s3 - (2.0 / w) * std::log(u);
      log_hat = (lambda - 1.0) * std::log(s3) - 0.5 * w * x;
    }
    if (std::log(v) <= log_kernel(x, lambda, w) - log_hat) return x;
  }
}

// Exact rejection from the Gamma(lambda, w/2) envelope: the kernel is the
// gamma kernel times exp(-w/(2x)) <= 1.  Acceptance tends to 1 as w -> 0,
// which is exactly the regime where the mode-shift cubic would overflow.
double gig_gamma_reject(RngStream& rng, double lambda, double w) {
  for (int trial = 0; trial < 10000; ++trial) {
    const double x = sample_gamma(rng, lambda, 0.5 * w);
    if (std::log(rng.uniform()) <= -0.5 * w / x) return x;
  }
  throw NumericalError("sample_gig: gamma-envelope rejection stalled");
}

// Standard-form draw, lambda >= 0, w > 0.
double gig_standard(RngStream& rng, double lambda, double w) {
  if (lambda >= 1.0 && w < 1e-4) return gig_gamma_reject(rng, lambda, w);
  if (lambda >= 1.0 || w > 1.0) return gig_rou_shift(rng, lambda, w);
  const double t = std::min(0.5, (2.0 / 3.0) * std::sqrt(1.0 - lambda));
  if (w >= t) return gig_rou_noshift(rng, lambda, w);
  return gig_composition(rng, lambda, w);
}

}  // namespace

double sample_gamma(RngStream& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw NumericalError("sample_gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Draw at shape+1, then multiply by U^(1/shape).  The uniform is
    // consumed first so the draw order is part of the contract.
    const double boost = std::pow(rng.uniform(), 1.0 / shape);
    return boost * sample_gamma(rng, shape + 1.0, rate);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double z, v;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
      return d * v / rate;
    }
  }
}

double sample_inverse_gamma(RngStream& rng, double shape, double rate) {
  return 1.0 / sample_gamma(rng, shape, rate);
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

double log_inverse_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - rate / x;
}

GigParams::GigParams(double lambda_in, double chi_in, double psi_in)
    : lambda(lambda_in), chi(chi_in), psi(psi_in) {
  if (!std::isfinite(lambda) || !std::isfinite(chi) || !std::isfinite(psi) ||
      !(psi > 0.0) || !(chi >= 0.0)) {
    throw NumericalError("GigParams: need finite parameters, psi > 0, chi >= 0");
  }
  if (chi == 0.0 && !(lambda > 0.0)) {
    throw NumericalError("GigParams: chi == 0 requires lambda > 0");
  }
}

double sample_gig(RngStream& rng, const GigParams& p) {
  if (p.chi == 0.0) return sample_gamma(rng, p.lambda, 0.5 * p.psi);
  const double w = std::sqrt(p.chi * p.psi);
  const double scale = std::sqrt(p.chi / p.psi);
  if (p.lambda < 0.0) return scale / gig_standard(rng, -p.lambda, w);
  return scale * gig_standard(rng, p.lambda, w);
}

double log_gig_pdf(double x, const GigParams& p) {
  if (!(x > 0.0)) return kNegInf;
  if (p.chi == 0.0) return log_gamma_pdf(x, p.lambda, 0.5 * p.psi);
  const double w = std::sqrt(p.chi * p.psi);
  return 0.5 * p.lambda * (std::log(p.psi) - std::log(p.chi)) - kLn2 -
         log_bessel_k(p.lambda, w) + (p.lambda - 1.0) * std::log(x) -
         0.5 * (p.chi / x + p.psi * x);
}

MvnPrecision::MvnPrecision(Eigen::MatrixXd precision,
                           const Eigen::VectorXd& linear)
    : llt_(std::move(precision)) {
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("MvnPrecision: precision matrix is not positive definite");
  }
  mean_ = llt_.solve(linear);
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd MvnPrecision::sample(RngStream& rng, double scale) const {
  Eigen::VectorXd z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // Solve L^T u = z so that u has covariance P^-1.
  const Eigen::VectorXd u = llt_.matrixU().solve(z);
  return mean_ + scale * u;
}

double MvnPrecision::quad_form(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd v = x - mean_;
  return (llt_.matrixU() * v).squaredNorm();
}

double MvnPrecision::log_pdf(const Eigen::VectorXd& x,
                             double variance_scale) const {
  const double p = static_cast<double>(mean_.size());
  return -0.5 * p * std::log(2.0 * kPi * variance_scale) + 0.5 * log_det_ -
         0.5 * quad_form(x) / variance_scale;
}

}  // namespace ngmc
