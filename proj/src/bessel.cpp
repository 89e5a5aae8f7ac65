#include "ngmc/bessel.hpp"

#include <cmath>
#include <stdexcept>

#include "ngmc/errors.hpp"
#include "ngmc/quadrature.hpp"

namespace ngmc {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kEps = 1e-17;
constexpr int kMaxIter = 30000;

// chi(mu) = [1/Gamma(1-mu) - 1/Gamma(1+mu)] / (2 mu) and
// eta(mu) = [1/Gamma(1-mu) + 1/Gamma(1+mu)] / 2 for |mu| <= 1/2.
// The difference quotient cancels catastrophically near mu = 0, so below
// |mu| = 0.1 chi comes from the odd Taylor coefficients of 1/Gamma(1+mu).
void gamma_pair(double mu, double& chi, double& eta) {
  const double rg_plus = 1.0 / std::tgamma(1.0 + mu);
  const double rg_minus = 1.0 / std::tgamma(1.0 - mu);
  eta = 0.5 * (rg_minus + rg_plus);
  if (std::abs(mu) >= 0.1) {
    chi = (rg_minus - rg_plus) / (2.0 * mu);
    return;
  }
  // Odd coefficients d1, d3, ... of 1/Gamma(1+x) = sum d_j x^j.
  constexpr double d1 = 0.57721566490153286;
  constexpr double d3 = -0.042002635034095236;
  constexpr double d5 = -0.042197734555544337;
  constexpr double d7 = 0.0072189432466630995;
  constexpr double d9 = -0.00021524167411495097;
  constexpr double d11 = -2.0134854780788239e-5;
  constexpr double d13 = 1.1330272319816959e-6;
  const double m2 = mu * mu;
  chi = -(d1 + m2 * (d3 + m2 * (d5 + m2 * (d7 + m2 * (d9 + m2 * (d11 + m2 * d13))))));
}

struct BasePair {
  double k_mu;      // K_mu(x)   times exp(-log_offset)
  double k_mu1;     // K_{mu+1}  times exp(-log_offset)
  double log_offset;
};

// Temme's series for K_mu and K_{mu+1}, x <= 2, |mu| <= 1/2.
BasePair base_small_x(double mu, double x) {
  const double x1 = 0.5 * x;
  const double d = -std::log(x1);
  const double e = mu * d;
  const double pimu = kPi * mu;
  const double fact = (std::abs(pimu) < 1e-30) ? 1.0 : pimu / std::sin(pimu);
  const double fact2 = (std::abs(e) < 1e-30) ? 1.0 : std::sinh(e) / e;
  double chi, eta;
  gamma_pair(mu, chi, eta);

  double ff = fact * (chi * std::cosh(e) + eta * fact2 * d);
  double sum = ff;
  const double e2 = std::exp(e);
  // p0 = (x/2)^-mu Gamma(1+mu)/2, q0 = (x/2)^mu Gamma(1-mu)/2, written with
  // the reciprocal-gamma combinations to stay finite at mu = +-1/2.
  double p = 0.5 * e2 / (eta - mu * chi);
  double q = 0.5 / (e2 * (eta + mu * chi));
  double c = 1.0;
  const double x2 = x1 * x1;
  double sum1 = p;
  for (int i = 1; i < kMaxIter; ++i) {
    ff = (i * ff + p + q) / (i * i - mu * mu);
    c *= x2 / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    sum1 += c * (p - i * ff);
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  return BasePair{sum, sum1 * (2.0 / x), 0.0};
}

// Steed/Lentz continued fraction (Temme normalisation) for e^x K_mu and
// e^x K_{mu+1}, x > 2, |mu| <= 1/2.
BasePair base_large_x(double mu, double x) {
  const double a1 = 0.25 - mu * mu;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i < kMaxIter; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h = a1 * h;
  const double k_mu = std::sqrt(kPi / (2.0 * x)) / s;  // = e^x K_mu(x)
  const double k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
  return BasePair{k_mu, k_mu1, -x};
}

}  // namespace

double log_bessel_k(double nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x) || !std::isfinite(nu)) {
    throw std::domain_error("log_bessel_k: requires finite nu and x > 0");
  }
  const double anu = std::abs(nu);  // K_nu = K_-nu, exactly, by construction
  const int steps = static_cast<int>(anu + 0.5);
  const double mu = anu - steps;  // |mu| <= 1/2

  BasePair bp = (x <= 2.0) ? base_small_x(mu, x) : base_large_x(mu, x);

  // Upward order recurrence K_{m+1} = K_{m-1} + (2m/x) K_m, stable for K.
  double km = bp.k_mu, kp = bp.k_mu1;
  double offset = bp.log_offset;
  double m = mu;
  for (int i = 0; i < steps; ++i) {
    m += 1.0;
    const double knext = km + (2.0 * m / x) * kp;
    km = kp;
    kp = knext;
    if (kp > 1e280) {  // rescale before the recurrence can overflow
      km *= 1e-280;
      kp *= 1e-280;
      offset += 280.0 * 2.302585092994045684;
    }
  }
  return std::log(km) + offset;
}

double log_bessel_k_ratio(double nu_num, double x_num, double nu_den,
                          double x_den) {
  if (nu_num == nu_den && x_num == x_den) return 0.0;
  return log_bessel_k(nu_num, x_num) - log_bessel_k(nu_den, x_den);
}

double log_bessel_k_quadrature_oracle(double nu, double x, double rel_tol) {
  if (!(x >= 1e-6)) {
    throw NumericalError("bessel oracle: validated only for x >= 1e-6");
  }
  const double anu = std::abs(nu);
  // Integrate exp(x - x cosh t) cosh(nu t): value e^x K_nu(x), so the
  // integrand starts at 1 and never underflows near t = 0.  Clip where
  // x cosh t - |nu| t exceeds 750 beyond the leading scale.
  double t_max = 1.0;
  while (x * std::cosh(t_max) - anu * t_max - x < 750.0 && t_max < 60.0) {
    t_max *= 1.25;
  }
  auto f = [&](double t) {
    return std::exp(x - x * std::cosh(t)) * std::cosh(anu * t);
  };
  QuadratureOptions opt;
  opt.rel_tol = rel_tol;
  opt.max_segments = 20000;
  const QuadratureResult r = integrate(f, 0.0, t_max, opt);
  if (!r.converged) {
    throw NumericalError("bessel oracle: quadrature did not converge");
  }
  return std::log(r.value) - x;
}

double bessel_k_quadrature_oracle(double nu, double x, double rel_tol) {
  return std::exp(log_bessel_k_quadrature_oracle(nu, x, rel_tol));
}

}  // namespace ngmc
