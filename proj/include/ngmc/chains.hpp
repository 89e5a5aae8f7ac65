#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngmc/model.hpp"
#include "ngmc/rng.hpp"

namespace ngmc {

enum class ChainKind { kThreeBlock, kTwoBlock, kHaarPxDa };

// Canonical tokens: "three_block", "two_block", "haar_pxda".  parse also
// accepts "sandwich" as an alias for haar_pxda.  Throws ConfigError on
// unknown names.
std::string chain_kind_name(ChainKind kind);
ChainKind parse_chain_kind(const std::string& name);

struct ChainOptions {
  // Opt-in: replace |beta_j| < 1e-300 by sign(beta_j) * 1e-300 ahead of the
  // local-scale draw, instead of failing on the improper conditional that a
  // hard zero triggers when a <= 1/2.
  bool clamp_zero_beta = false;
};

// Multiplicative move applied to the local scales: tau -> g * tau, g > 0.
struct GroupElement {
  double g = 1.0;
};

// Exact rejection sampler for the scale-move density
//   f(g) ~ g^{p(a-1/2)-1} exp(-g b sum(tau))
//          / [ Q(g)^{n/2+alpha} det(X'X + (1/g) D^-1)^{1/2} ],
//   Q(g) = Y'Y + 2 xi - (X'Y)' (X'X + (1/g) D^-1)^{-1} (X'Y),
// whitened by one symmetric eigendecomposition per tau so each evaluation
// costs O(p).  The envelope is piecewise gamma-shaped on a log-g partition
// around the target's peak: on each cell both Q and the whitened determinant
// are bounded by their monotone-limit values at the cell edges, which makes
// the cap rigorous everywhere and tight on narrow cells.  Candidates come by
// inverse-CDF from the selected cell, so every trial consumes exactly three
// uniforms (cell choice, position, accept).
class GroupElementSampler {
 public:
  // Requires xi > 0 (ConfigError otherwise) and finite positive tau entries
  // (NumericalError otherwise).
  GroupElementSampler(const TauVector& tau, const Dataset& data,
                      const Hyperparams& hp);

  // Exact draw from f.  Throws NumericalError if the envelope is observed
  // below the target by more than 1e-9 in the log, which would falsify the
  // domination bound, or if no candidate is accepted within the trial cap.
  GroupElement draw(RngStream& rng);

  // Unnormalized log density and log envelope, exposed for audits.
  double log_target(double g) const;
  double log_envelope(double g) const;

  long long trials() const { return trials_; }
  long long draws() const { return draws_; }

 private:
  // One envelope cell: ln_b + (shape - 1) ln g - theta g on an x-interval
  // (x = theta g, log-scale bounds; the first cell reaches x = 0, the last
  // reaches infinity).  Anchors hold the incomplete-gamma values used by the
  // in-cell inverse CDF; lower_anchored picks the numerically fast-growing
  // side so the cell mass never suffers catastrophic cancellation.
  struct Cell {
    double ln_x_hi;    // right boundary (last cell: +inf)
    double shape;
    double ln_b;
    double ln_area;    // log integral of the cap over the cell (in g)
    double cum;        // cumulative normalized selection weight
    bool lower_anchored;
    double anchor_lo;  // incomplete gamma at the left edge
    double anchor_hi;  // incomplete gamma at the right edge
  };

  void build_cells();
  double q_of(double g) const;  // Q(g), clamped side unchecked

  int p_ = 0;
  bool exact_gamma_ = false;  // X'X numerically zero: f is exactly Gamma(pa,.)
  double theta_ = 0.0;        // b * sum(tau): rate shared by every cap
  double ln_theta_ = 0.0;
  double elin_ = 0.0;         // p(a-1/2) - 1, the bare log-g exponent
  double qpow_ = 0.0;         // n/2 + alpha
  double yty2xi_ = 0.0;       // Y'Y + 2 xi
  double two_xi_ = 0.0;       // certified lower bound on the fit remainder
  Eigen::VectorXd lam_;       // eigenvalues of W X'X W, clamped >= 0, ascending
  Eigen::VectorXd c2_;        // squared whitened coordinates of X'Y (rank part)
  int rank_ = 0;              // eigenvalues above lam_max * 1e-12
  double s1_ = 0.0;           // p a: shape valid down to g = 0
  double s2_ = 0.0;           // p(a-1/2) + (p-rank)/2: shape valid out to infinity
  double exact_ln_b_ = 0.0;   // cap constant in the exact-gamma mode
  std::vector<Cell> cells_;
  long long trials_ = 0;
  long long draws_ = 0;
};

struct GroupDraw {
  GroupElement element;
  long long trials = 0;  // candidates consumed by this one draw
};

// One-shot convenience wrapper around GroupElementSampler.
GroupDraw sample_group_element(const TauVector& tau, const Dataset& data,
                               const Hyperparams& hp, RngStream& rng);

// One sweep of tau | beta, sigma2; beta | sigma2, tau; sigma2 | beta, tau.
// The beta block conditions on the incoming sigma2.
class ThreeBlockKernel {
 public:
  ThreeBlockKernel(const Dataset& data, const Hyperparams& hp,
                   ChainOptions opts = {});
  ChainState step(const ChainState& state, RngStream& rng);
  const TauVector& last_tau() const { return last_tau_; }

 private:
  const Dataset& data_;
  Hyperparams hp_;
  ChainOptions opts_;
  TauVector last_tau_;
};

// One sweep of tau | beta, sigma2; sigma2 | tau (beta integrated out);
// beta | sigma2, tau.  The beta block conditions on the fresh sigma2.
class TwoBlockKernel {
 public:
  TwoBlockKernel(const Dataset& data, const Hyperparams& hp,
                 ChainOptions opts = {});
  ChainState step(const ChainState& state, RngStream& rng);
  const TauVector& last_tau() const { return last_tau_; }

 private:
  const Dataset& data_;
  Hyperparams hp_;
  ChainOptions opts_;
  TauVector last_tau_;
};

// Two-block sweep with an extra scale move between the blocks: after the tau
// draw, tau is replaced by g * tau with g from GroupElementSampler, and the
// sigma2 and beta blocks condition on the moved scales.  Requires xi > 0.
class HaarPxDaKernel {
 public:
  HaarPxDaKernel(const Dataset& data, const Hyperparams& hp,
                 ChainOptions opts = {});
  ChainState step(const ChainState& state, RngStream& rng);
  const TauVector& last_tau() const { return last_tau_; }
  double last_group_element() const { return last_g_; }

  // Test hook: pin the group element to a fixed value; the pinned path
  // consumes no randomness, so g = 1 reproduces TwoBlockKernel bit for bit.
  void force_group_element(double g) { forced_g_ = g; }
  void clear_forced_group_element() { forced_g_.reset(); }

  long long group_trials() const { return group_trials_; }
  long long group_draws() const { return group_draws_; }

 private:
  const Dataset& data_;
  Hyperparams hp_;
  ChainOptions opts_;
  TauVector last_tau_;
  double last_g_ = 1.0;
  std::optional<double> forced_g_;
  long long group_trials_ = 0;
  long long group_draws_ = 0;
};

struct RunConfig {
  ChainKind kind = ChainKind::kTwoBlock;
  std::int64_t iterations = 100000;
  // Negative means "auto": one tenth of iterations.
  std::int64_t burn_in = -1;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  // Default start: beta = ones, sigma2 = 1.
  std::optional<ChainState> init;
  ChainOptions options;
};

struct SampleTrace {
  std::vector<ChainState> states;  // post burn-in, thinned
  RunConfig config;                // as resolved (burn_in made explicit)
  // Accepted / proposed group-move candidates; set only for the PX-DA chain.
  std::optional<double> pxda_acceptance_rate;
};

// Runs the configured chain.  Trace length is
// floor((iterations - burn_in) / thin).  Kernel failures are rethrown with
// the iteration index attached.  ConfigError on invalid lengths or on the
// PX-DA kind with xi = 0.
SampleTrace run_chain(const RunConfig& config, const Dataset& data,
                      const Hyperparams& hp);

}  // namespace ngmc
