#include "ngmc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ngmc/bessel.hpp"
#include "ngmc/distributions.hpp"
#include "ngmc/errors.hpp"
#include "ngmc/quadrature.hpp"

namespace ngmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLnTwoPi = 1.8378770664093454836;

// p = 1 data summaries: everything the diagonal needs from the dataset.
struct P1Instance {
  double x2;   // X'X
  double xy;   // X'Y
  double yty;  // Y'Y
  int n;
};

P1Instance p1_summaries(const Dataset& data) {
  if (data.p() != 1)
    throw ConfigError("trace probe: the instance must have p = 1");
  return P1Instance{data.gram(0, 0), data.xty[0], data.yty, data.n()};
}

// Log of the p = 1 diagonal kernel
//   int pdf_gig(tau | beta, s2) pdf_ig(s2 | tau) pdf_n(beta | s2, tau) dtau
// by adaptive quadrature in u = ln tau, peak-bracketed and exp-shifted.
double log_diag_point_p1(double beta, double s2, const P1Instance& inst,
                         const Hyperparams& hp) {
  const double lam = hp.a - 0.5;
  const double chi = beta * beta / s2;
  if (!(chi > 0.0) || !std::isfinite(chi))
    throw NumericalError(
        "diag kernel: beta^2/sigma^2 must be positive and finite");
  const double psi = 2.0 * hp.b;
  const double ln_gig_norm = 0.5 * lam * std::log(psi / chi) -
                             std::log(2.0) -
                             log_bessel_k(lam, std::sqrt(chi * psi));
  const double s_ig = 0.5 * (inst.n + 2.0 * hp.alpha);
  const double lg_ig = std::lgamma(s_ig);
  const double ls2 = std::log(s2);

  const std::function<double(double)> log_f = [&](double u) {
    const double tau = std::exp(u);
    const double inv_tau = 1.0 / tau;
    if (!std::isfinite(tau) || !std::isfinite(inv_tau)) return -kInf;
    // local-scale conditional factor
    double v = ln_gig_norm + (lam - 1.0) * u - 0.5 * (chi / tau + psi * tau);
    // sigma^2 | tau factor (beta integrated out), evaluated at s2 itself
    const double prec = inst.x2 + inv_tau;
    const double rate =
        0.5 * (inst.yty - inst.xy * inst.xy / prec + 2.0 * hp.xi);
    if (!(rate > 0.0)) return -kInf;
    v += s_ig * std::log(rate) - lg_ig - (s_ig + 1.0) * ls2 - rate / s2;
    // beta | sigma^2, tau factor, evaluated at beta itself
    const double mean = inst.xy / prec;
    v += 0.5 * (std::log(prec) - kLnTwoPi - ls2) -
         0.5 * prec * (beta - mean) * (beta - mean) / s2;
    return v + u;  // Jacobian of tau = e^u
  };

  // Start the peak hunt at the mode of the local-scale conditional, written
  // in the cancellation-free form for lam < 1.
  const double disc = std::sqrt((lam - 1.0) * (lam - 1.0) + chi * psi);
  const double gig_mode =
      (lam >= 1.0) ? ((lam - 1.0) + disc) / psi : chi / (disc + (1.0 - lam));
  const double u0 = std::log(gig_mode);
  double u_best = u0;
  double f_best = -kInf;
  for (int i = 0; i <= 80; ++i) {
    const double u = u0 - 40.0 + i;
    const double v = log_f(u);
    if (v > f_best) {
      f_best = v;
      u_best = u;
    }
  }
  if (!std::isfinite(f_best))
    throw NumericalError("diag kernel: integrand vanished on the scan grid");
  // Zoom in on the peak: at extreme chi/psi the integrand is a spike whose
  // curvature reaches ~sqrt(chi*psi), so a unit-spaced scan can sit thousands
  // of nats below the true maximum and the exp shift below would overflow.
  double half = 0.5;
  for (int round = 0; round < 5; ++round) {
    const double center = u_best;
    for (int i = 0; i <= 16; ++i) {
      const double u = center - half + i * (half / 8.0);
      const double v = log_f(u);
      if (v > f_best) {
        f_best = v;
        u_best = u;
      }
    }
    half /= 8.0;
  }
  const LogBracket br =
      bracket_log_peak(log_f, u_best, 45.0, u_best - 400.0, u_best + 400.0);
  QuadratureOptions opt;
  opt.rel_tol = 3e-8;
  opt.abs_tol = 1e-12;
  opt.max_segments = 2000;
  const QuadratureResult quad = integrate(
      [&](double u) { return std::exp(log_f(u) - f_best); }, br.lo, br.hi,
      opt);
  // log_f is assembled from terms whose magnitudes can dwarf the result, so
  // the shifted integrand carries rounding noise of about eps times the
  // largest such term. An error estimate stalled at that floor is genuine
  // convergence, not failure.
  const double noise_scale = 1.0 + std::abs(f_best) + disc +
                             std::abs(ln_gig_norm);
  const double noise_floor =
      32.0 * std::numeric_limits<double>::epsilon() * noise_scale;
  if (!quad.converged &&
      quad.error_estimate > noise_floor * std::abs(quad.value)) {
    throw NumericalError(
        "diag kernel tau integral: adaptive quadrature did not reach "
        "tolerance (error estimate " + std::to_string(quad.error_estimate) +
        ")");
  }
  if (!(quad.value > 0.0)) return -kInf;
  return f_best + std::log(quad.value);
}

// sigma^2-profile of the diagonal at fixed beta: int k dsigma^2 over the
// probe window, integrated in ln sigma^2.
double sigma2_profile(double beta, const P1Instance& inst,
                      const Hyperparams& hp, const TraceProbeOptions& popt) {
  QuadratureOptions opt;
  opt.rel_tol = 1e-6;
  opt.abs_tol = 1e-280;
  opt.max_segments = 800;
  return integrate_or_throw(
      [&](double ls) {
        const double s2 = std::exp(ls);
        return s2 * std::exp(log_diag_point_p1(beta, s2, inst, hp));
      },
      std::log(popt.sigma2_lo), std::log(popt.sigma2_hi), opt,
      "diag kernel sigma2 profile");
}

// Both-signs slab integral 2 * int_{b_lo}^{b_hi} (sigma^2 profile) dbeta,
// integrated in ln beta.
double beta_slab(double b_lo, double b_hi, const P1Instance& inst,
                 const Hyperparams& hp, const TraceProbeOptions& popt) {
  QuadratureOptions opt;
  opt.rel_tol = 3e-6;
  opt.abs_tol = 1e-280;
  opt.max_segments = 800;
  return 2.0 * integrate_or_throw(
                   [&](double lb) {
                     const double b = std::exp(lb);
                     return b * sigma2_profile(b, inst, hp, popt);
                   },
                   std::log(b_lo), std::log(b_hi), opt,
                   "diag kernel beta slab");
}

struct SlopeFit {
  double slope = 0.0;
  double std_err = 0.0;
};

// Ordinary least squares of y on x with the slope's standard error from the
// residual variance; requires at least 3 points.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw NumericalError("slope fit: degenerate abscissae");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - my - fit.slope * (x[i] - mx);
    ss_res += r * r;
  }
  fit.std_err = std::sqrt(std::max(ss_res, 0.0) / (n - 2) / sxx);
  return fit;
}

}  // namespace

DiagKernelEstimate diag_kernel(const ChainState& state, const Dataset& data,
                               const Hyperparams& hp, long long n_mc,
                               RngStream& rng) {
  const int p = data.p();
  if (p > 3)
    throw ConfigError("diag_kernel is restricted to p <= 3");
  if (static_cast<int>(state.beta.size()) != p)
    throw ConfigError("diag_kernel: state dimension does not match the data");
  if (!(state.sigma2 > 0.0) || !std::isfinite(state.sigma2) ||
      !state.beta.allFinite())
    throw ConfigError("diag_kernel: state must be finite with sigma2 > 0");
  if (n_mc < 2)
    throw ConfigError("diag_kernel needs n_mc >= 2");

  const std::vector<GigParams> tau_laws = cond_tau(state, hp);
  TauVector tau(p);
  double mean = 0.0;
  double m2 = 0.0;
  for (long long m = 0; m < n_mc; ++m) {
    for (int j = 0; j < p; ++j) tau[j] = sample_gig(rng, tau_laws[j]);
    const InverseGammaParams ig = cond_sigma2_given_tau(tau, data, hp);
    double lp = log_inverse_gamma_pdf(state.sigma2, ig.shape, ig.rate);
    lp += cond_beta(tau, state.sigma2, data).log_pdf(state.beta);
    const double v = std::exp(lp);
    const double d = v - mean;
    mean += d / static_cast<double>(m + 1);
    m2 += d * (v - mean);
  }
  const double var = std::max(m2 / static_cast<double>(n_mc - 1), 0.0);
  return DiagKernelEstimate{mean, std::sqrt(var / static_cast<double>(n_mc)),
                            n_mc};
}

double diag_kernel_quadrature(const ChainState& state, const Dataset& data,
                              const Hyperparams& hp) {
  const P1Instance inst = p1_summaries(data);
  if (state.beta.size() != 1 || !(state.sigma2 > 0.0) ||
      !std::isfinite(state.sigma2) || !std::isfinite(state.beta[0]))
    throw ConfigError(
        "diag_kernel_quadrature: state must be finite p = 1 with sigma2 > 0");
  return std::exp(
      log_diag_point_p1(state.beta[0], state.sigma2, inst, hp));
}

const char* trace_verdict_name(TraceVerdict v) {
  switch (v) {
    case TraceVerdict::kConvergentEvidence:
      return "ConvergentEvidence";
    case TraceVerdict::kLogDivergenceEvidence:
      return "LogDivergenceEvidence";
    case TraceVerdict::kInconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

TraceProbeReport trace_probe(double a, const Dataset& data,
                             const Hyperparams& hp_rest,
                             const TraceProbeOptions& opt) {
  const P1Instance inst = p1_summaries(data);
  const Hyperparams hp(a, hp_rest.b, hp_rest.alpha, hp_rest.xi);

  const std::size_t k_cut = opt.cutoffs.size();
  if (k_cut < 4)
    throw ConfigError("trace probe: need at least 4 cutoffs");
  for (std::size_t k = 0; k < k_cut; ++k) {
    if (!(opt.cutoffs[k] > 0.0) || !std::isfinite(opt.cutoffs[k]))
      throw ConfigError("trace probe: cutoffs must be positive and finite");
    if (k > 0 && !(opt.cutoffs[k] < opt.cutoffs[k - 1]))
      throw ConfigError("trace probe: cutoffs must be strictly decreasing");
  }
  if (!(opt.beta_max > opt.cutoffs.front()))
    throw ConfigError("trace probe: beta_max must exceed the first cutoff");
  if (!(opt.sigma2_lo > 0.0) || !(opt.sigma2_hi > opt.sigma2_lo))
    throw ConfigError("trace probe: bad sigma2 window");

  TraceProbeReport report;
  report.a = a;
  report.cutoffs = opt.cutoffs;

  // Base integral over [cutoff_0, beta_max], split into log-decades so the
  // outermost decade's share doubles as a truncation diagnostic.
  double base = 0.0;
  double top_slab = 0.0;
  {
    double lo = opt.cutoffs.front();
    while (lo < opt.beta_max) {
      const double hi = std::min(lo * 10.0, opt.beta_max);
      top_slab = beta_slab(lo, hi, inst, hp, opt);
      base += top_slab;
      lo = hi;
    }
  }
  if (!(base > 0.0) || !std::isfinite(base))
    throw NumericalError("trace probe: base integral is not positive");
  report.tail_fraction = top_slab / base;

  // Restricted integrals accumulate slab by slab, so they are nondecreasing
  // along the cutoff list by construction.
  report.restricted_integrals.resize(k_cut);
  report.restricted_integrals[0] = base;
  for (std::size_t k = 1; k < k_cut; ++k)
    report.restricted_integrals[k] =
        report.restricted_integrals[k - 1] +
        beta_slab(opt.cutoffs[k], opt.cutoffs[k - 1], inst, hp, opt);

  // Affine fit of R against ln(1/eps).
  std::vector<double> z(k_cut);
  for (std::size_t k = 0; k < k_cut; ++k) z[k] = -std::log(opt.cutoffs[k]);
  const SlopeFit fit = fit_slope(z, report.restricted_integrals);
  report.slope = fit.slope;
  report.slope_std_err = fit.std_err;

  bool stalled = true;
  for (std::size_t k = k_cut - 3; k < k_cut; ++k) {
    const double inc = report.restricted_integrals[k] -
                       report.restricted_integrals[k - 1];
    stalled = stalled &&
              inc < opt.stall_tol * report.restricted_integrals[k - 1];
  }
  if (stalled)
    report.verdict = TraceVerdict::kConvergentEvidence;
  else if (report.slope > opt.slope_z * report.slope_std_err)
    report.verdict = TraceVerdict::kLogDivergenceEvidence;
  else
    report.verdict = TraceVerdict::kInconclusive;
  return report;
}

double small_beta_asymptotics_check(double a, const Hyperparams& hp,
                                    double sigma2, double beta_scale) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw ConfigError("small-beta check: sigma2 must be positive and finite");
  if (!(beta_scale > 0.0) || !std::isfinite(beta_scale))
    throw ConfigError("small-beta check: beta_scale must be positive");
  const Hyperparams h(a, hp.b, hp.alpha, hp.xi);
  const P1Instance inst{1.0, 1.0, 1.0, 1};

  const int n_pts = 13;
  const double lb_lo = std::log(1e-8 * beta_scale);
  const double lb_hi = std::log(1e-2 * beta_scale);
  std::vector<double> lnb(n_pts), lnk(n_pts);
  for (int i = 0; i < n_pts; ++i) {
    lnb[i] = lb_lo + (lb_hi - lb_lo) * i / (n_pts - 1);
    lnk[i] = log_diag_point_p1(std::exp(lnb[i]), sigma2, inst, h);
  }
  return fit_slope(lnb, lnk).slope;
}

}  // namespace ngmc
