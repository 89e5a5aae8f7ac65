#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ngmc/rng.hpp"

namespace ngmc {

// --- scalar distributions ----------------------------------------------

// Gamma(shape, rate), density proportional to x^(shape-1) exp(-rate x).
// Marsaglia-Tsang squeeze for shape >= 1; the shape < 1 case boosts a
// (shape+1) draw by U^(1/shape).
double sample_gamma(RngStream& rng, double shape, double rate);

// Inverse gamma with density proportional to x^(-shape-1) exp(-rate / x).
double sample_inverse_gamma(RngStream& rng, double shape, double rate);

double log_gamma_pdf(double x, double shape, double rate);
double log_inverse_gamma_pdf(double x, double shape, double rate);

// --- generalised inverse Gaussian ---------------------------------------

// Density proportional to x^(lambda-1) exp(-(chi / x + psi x) / 2) on x > 0.
// Requires psi > 0 and chi >= 0; chi == 0 additionally requires lambda > 0,
// where the law degenerates to Gamma(lambda, psi / 2).  The constructor
// throws NumericalError on invalid parameters.
struct GigParams {
  GigParams(double lambda_in, double chi_in, double psi_in);
  double lambda, chi, psi;
};

// Exact draw via ratio-of-uniforms (with and without mode shift) plus a
// three-piece composition-rejection scheme in the tiny-omega corner, so the
// acceptance rate stays bounded away from zero over the whole domain.
double sample_gig(RngStream& rng, const GigParams& p);

// Normalised log density (uses log K for the constant; Gamma form at chi=0).
double log_gig_pdf(double x, const GigParams& p);

// --- multivariate normal in precision form ------------------------------

// Law N(mean, scale^2 * P^(-1)) specified through the precision matrix P and
// the linear term h with P mean = h.  One Cholesky factorisation is shared
// by mean solve, sampling, quadratic forms, and density evaluation.
class MvnPrecision {
 public:
  // Throws NumericalError when the precision matrix is not positive
  // definite (Cholesky failure).
  MvnPrecision(Eigen::MatrixXd precision, const Eigen::VectorXd& linear);

  const Eigen::VectorXd& mean() const { return mean_; }
  double log_det_precision() const { return log_det_; }
  int dim() const { return static_cast<int>(mean_.size()); }

  // mean + scale * L^-T z with z standard normal (covariance scale^2 P^-1).
  Eigen::VectorXd sample(RngStream& rng, double scale) const;

  // (x - mean)' P (x - mean)
  double quad_form(const Eigen::VectorXd& x) const;

  // Log density of N(mean, variance_scale * P^-1) at x.
  double log_pdf(const Eigen::VectorXd& x, double variance_scale) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd mean_;
  double log_det_;
};

}  // namespace ngmc
