#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ngmc/distributions.hpp"

namespace ngmc {

// Model hyperparameters: tau_j ~ Gamma(a, b) i.i.d., sigma^2 ~ the inverse
// gamma with shape alpha and rate xi (alpha = 0 or xi = 0 admit an improper
// prior; posterior propriety is then the caller's responsibility).
struct Hyperparams {
  // Throws ConfigError unless a > 0, b > 0, alpha >= 0, xi >= 0.
  Hyperparams(double a_in, double b_in, double alpha_in, double xi_in);

  double a, b, alpha, xi;

  // The sandwich chain's group move requires a strictly positive xi (its
  // rejection envelope integrates e^{-xi-ish} tails); gate on this flag.
  bool pxda_permitted() const { return xi > 0.0; }
};

// Regression data plus the Gram quantities every chain step reuses.
struct Dataset {
  // Throws ConfigError on dimension mismatch, empty data, or non-finite
  // entries.
  Dataset(Eigen::MatrixXd x_in, Eigen::VectorXd y_in);

  Eigen::MatrixXd X;
  Eigen::VectorXd Y;
  Eigen::MatrixXd gram;   // X'X
  Eigen::VectorXd xty;    // X'Y
  double yty;             // Y'Y
  double lambda_max;      // largest eigenvalue of X'X

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
};

// Markov chain state: the chains live on (beta, sigma^2); the local scales
// tau are auxiliary and re-drawn at the top of every step.
struct ChainState {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
};

using TauVector = Eigen::VectorXd;  // entrywise positive

// Unnormalised log posterior density of (beta, tau, sigma^2) given Y,
// written term for term:
//   -(n/2) ln s2 - |Y-Xb|^2/(2 s2)                      likelihood
//   -(p/2) ln s2 - sum ln(tau_j)/2 - b' D^-1 b/(2 s2)   beta prior
//   -(alpha+1) ln s2 - xi/s2                            sigma^2 prior
//   sum (a-1) ln tau_j - b tau_j                        tau prior
double log_joint(const ChainState& state, const TauVector& tau,
                 const Dataset& data, const Hyperparams& hp);

// beta | sigma^2, tau, Y  =  N(A^-1 X'Y, sigma^2 A^-1),  A = X'X + D^-1.
struct CondBeta {
  MvnPrecision law;  // precision A, linear term X'Y
  double sigma2;

  Eigen::VectorXd draw(RngStream& rng) const {
    return law.sample(rng, std::sqrt(sigma2));
  }
  double log_pdf(const Eigen::VectorXd& beta) const {
    return law.log_pdf(beta, sigma2);
  }
};
// Throws NumericalError naming the coordinate when 1/tau_j is not finite,
// or on Cholesky failure of A.
CondBeta cond_beta(const TauVector& tau, double sigma2, const Dataset& data);

struct InverseGammaParams {
  double shape, rate;
};

// sigma^2 | beta, tau, Y: shape (n+p+2 alpha)/2,
// rate (|Y-X beta|^2 + beta' D^-1 beta + 2 xi)/2.
InverseGammaParams cond_sigma2_given_beta_tau(const Eigen::VectorXd& beta,
                                              const TauVector& tau,
                                              const Dataset& data,
                                              const Hyperparams& hp);

// sigma^2 | tau, Y (beta integrated out): shape (n+2 alpha)/2,
// rate (Y'Y - (X'Y)' A^-1 (X'Y) + 2 xi)/2, computed through one p x p
// Cholesky solve.  The quadratic-form residual is nonnegative in exact
// arithmetic; values below -1e-8 * Y'Y raise NumericalError, small negative
// roundoff clamps to zero.  The rate is always >= xi.
InverseGammaParams cond_sigma2_given_tau(const TauVector& tau,
                                         const Dataset& data,
                                         const Hyperparams& hp);

// tau_j | beta, sigma^2 are independent GIG(a - 1/2, beta_j^2/sigma^2, 2b).
// When a <= 1/2 and beta_j^2/sigma^2 underflows to exactly zero the
// conditional is improper: throws NumericalError naming the coordinate.
// (Callers may clamp |beta_j| upstream; see the chain options.)
std::vector<GigParams> cond_tau(const ChainState& state,
                                const Hyperparams& hp);

}  // namespace ngmc
