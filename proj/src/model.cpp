#include "ngmc/model.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "ngmc/errors.hpp"

namespace ngmc {

Hyperparams::Hyperparams(double a_in, double b_in, double alpha_in,
                         double xi_in)
    : a(a_in), b(b_in), alpha(alpha_in), xi(xi_in) {
  if (!(a > 0.0) || !std::isfinite(a) || !(b > 0.0) || !std::isfinite(b)) {
    throw ConfigError("hyperparameters: a and b must be positive and finite");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha) || !(xi >= 0.0) ||
      !std::isfinite(xi)) {
    throw ConfigError(
        "hyperparameters: alpha and xi must be nonnegative and finite");
  }
}

Dataset::Dataset(Eigen::MatrixXd x_in, Eigen::VectorXd y_in)
    : X(std::move(x_in)), Y(std::move(y_in)) {
  if (X.rows() < 1 || X.cols() < 1) {
    throw ConfigError("dataset: X must have at least one row and column");
  }
  if (Y.size() != X.rows()) {
    throw ConfigError("dataset: Y has " + std::to_string(Y.size()) +
                      " entries but X has " + std::to_string(X.rows()) +
                      " rows");
  }
  if (!X.allFinite() || !Y.allFinite()) {
    throw ConfigError("dataset: X and Y must be finite");
  }
  gram = X.transpose() * X;
  xty = X.transpose() * Y;
  yty = Y.squaredNorm();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      gram, Eigen::EigenvaluesOnly);
  lambda_max = eig.eigenvalues().maxCoeff();
}

double log_joint(const ChainState& state, const TauVector& tau,
                 const Dataset& data, const Hyperparams& hp) {
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  const double s2 = state.sigma2;
  const double resid = (data.Y - data.X * state.beta).squaredNorm();
  double out = -0.5 * n * std::log(s2) - 0.5 * resid / s2;
  out += -0.5 * p * std::log(s2);
  for (int j = 0; j < data.p(); ++j) {
    out += -0.5 * std::log(tau[j]) -
           0.5 * state.beta[j] * state.beta[j] / (tau[j] * s2) +
           (hp.a - 1.0) * std::log(tau[j]) - hp.b * tau[j];
  }
  out += -(hp.alpha + 1.0) * std::log(s2) - hp.xi / s2;
  return out;
}

CondBeta cond_beta(const TauVector& tau, double sigma2, const Dataset& data) {
  Eigen::MatrixXd a = data.gram;
  for (int j = 0; j < data.p(); ++j) {
    const double inv = 1.0 / tau[j];
    if (!std::isfinite(inv)) {
      throw NumericalError(
          "cond_beta: 1/tau is not finite at coordinate " +
          std::to_string(j) + " (tau = " + std::to_string(tau[j]) + ")");
    }
    a(j, j) += inv;
  }
  return CondBeta{MvnPrecision(std::move(a), data.xty), sigma2};
}

InverseGammaParams cond_sigma2_given_beta_tau(const Eigen::VectorXd& beta,
                                              const TauVector& tau,
                                              const Dataset& data,
                                              const Hyperparams& hp) {
  const double resid = (data.Y - data.X * beta).squaredNorm();
  double prior_quad = 0.0;
  for (int j = 0; j < data.p(); ++j) {
    prior_quad += beta[j] * beta[j] / tau[j];
  }
  return InverseGammaParams{
      0.5 * (data.n() + data.p() + 2.0 * hp.alpha),
      0.5 * (resid + prior_quad + 2.0 * hp.xi)};
}

InverseGammaParams cond_sigma2_given_tau(const TauVector& tau,
                                         const Dataset& data,
                                         const Hyperparams& hp) {
  const CondBeta cb = cond_beta(tau, 1.0, data);
  double resid = data.yty - data.xty.dot(cb.law.mean());
  if (resid < -1e-8 * data.yty) {
    throw NumericalError(
        "cond_sigma2_given_tau: quadratic-form residual " +
        std::to_string(resid) + " is negative beyond roundoff");
  }
  resid = std::max(0.0, resid);
  return InverseGammaParams{0.5 * (data.n() + 2.0 * hp.alpha),
                            0.5 * (resid + 2.0 * hp.xi)};
}

std::vector<GigParams> cond_tau(const ChainState& state,
                                const Hyperparams& hp) {
  std::vector<GigParams> out;
  out.reserve(state.beta.size());
  for (Eigen::Index j = 0; j < state.beta.size(); ++j) {
    const double chi = state.beta[j] * state.beta[j] / state.sigma2;
    if (chi == 0.0 && hp.a <= 0.5) {
      throw NumericalError(
          "cond_tau: improper conditional at coordinate " + std::to_string(j) +
          ": beta is exactly zero and a <= 1/2");
    }
    out.emplace_back(hp.a - 0.5, chi, 2.0 * hp.b);
  }
  return out;
}

}  // namespace ngmc
