#pragma once

#include <vector>

#include "ngmc/model.hpp"
#include "ngmc/rng.hpp"

namespace ngmc {

// Estimate of the two-block transition kernel evaluated on the diagonal,
// k((beta, sigma^2), (beta, sigma^2)).
struct DiagKernelEstimate {
  double value = 0.0;    // nonnegative
  double std_err = 0.0;  // empirical; shrinks like n_mc^{-1/2}
  long long n_mc = 0;
};

// Monte-Carlo diagonal evaluation: the two-block kernel is a tau-mixture,
// so the diagonal is E[ pdf(sigma^2 | tau) * pdf(beta | sigma^2, tau) ] with
// tau drawn from its conditional given (beta, sigma^2).  Restricted to
// p <= 3 (desk scale).  Usage errors throw ConfigError; when a <= 1/2 and
// some beta_j is exactly zero the improper-conditional NumericalError from
// the tau conditional propagates.
DiagKernelEstimate diag_kernel(const ChainState& state, const Dataset& data,
                               const Hyperparams& hp, long long n_mc,
                               RngStream& rng);

// Deterministic oracle for p = 1: the same diagonal value by adaptive
// quadrature over ln tau.  Throws ConfigError unless data has p = 1.
double diag_kernel_quadrature(const ChainState& state, const Dataset& data,
                              const Hyperparams& hp);

enum class TraceVerdict {
  kConvergentEvidence,     // restricted integrals have numerically stalled
  kLogDivergenceEvidence,  // affine growth in ln(1/eps), slope >> its SE
  kInconclusive,
};

const char* trace_verdict_name(TraceVerdict v);

struct TraceProbeOptions {
  // Exclusion cutoffs for |beta|, strictly decreasing; at least 4 so the
  // stall rule (last three increments) and the affine fit are meaningful.
  std::vector<double> cutoffs = {1e-2, 1e-3, 1e-4, 1e-5,
                                 1e-6, 1e-7, 1e-8, 1e-9};
  double beta_max = 1e3;    // outer |beta| truncation
  double sigma2_lo = 1e-4;  // sigma^2 window, integrated on a log scale
  double sigma2_hi = 1e4;
  double stall_tol = 1e-3;  // relative increment below which growth "stalls"
  double slope_z = 10.0;    // significance multiple for the divergence call
};

struct TraceProbeReport {
  double a = 0.0;
  std::vector<double> cutoffs;               // decreasing
  std::vector<double> restricted_integrals;  // nondecreasing along the list
  TraceVerdict verdict = TraceVerdict::kInconclusive;
  double slope = 0.0;  // affine fit of R against ln(1/eps)
  double slope_std_err = 0.0;
  // Share of R carried by the outermost |beta| decade; a truncation
  // diagnostic for the beta_max cut.
  double tail_fraction = 0.0;
};

// Integrability probe of the diagonal kernel on a p = 1 instance:
//   R(eps) = 2 * int_{eps < beta < beta_max} int k((beta,s2),(beta,s2)) ds2 dbeta
// (the integrand is even in beta).  R is computed incrementally from slab
// integrals, so restricted_integrals is nondecreasing by construction.
// Verdict: stalled increments => kConvergentEvidence; otherwise a
// significant affine trend in ln(1/eps) => kLogDivergenceEvidence; else
// kInconclusive.  `a` replaces hp_rest.a.  Throws ConfigError on p != 1,
// invalid hyperparameters, or a malformed grid.
TraceProbeReport trace_probe(double a, const Dataset& data,
                             const Hyperparams& hp_rest,
                             const TraceProbeOptions& opt = {});

// Fitted log-log slope of the p = 1 diagonal-kernel integrand over a small
// |beta| grid (beta_scale * [1e-8, 1e-2]) on the unit instance (n = 1,
// X = 1, Y = 1), sigma^2 held fixed; `a` replaces hp.a.  Slopes near -1
// flag the non-integrable 1/|beta| regime; slopes bounded away from -1 an
// integrable edge.
double small_beta_asymptotics_check(double a, const Hyperparams& hp,
                                    double sigma2, double beta_scale = 1.0);

}  // namespace ngmc
