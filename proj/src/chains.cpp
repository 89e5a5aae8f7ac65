#include "ngmc/chains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ngmc/distributions.hpp"
#include "ngmc/errors.hpp"
#include "ngmc/gammainc.hpp"

namespace ngmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEnvelopeSlack = 1e-9;
constexpr long long kMaxTrialsPerDraw = 10000000;

// Incomplete-gamma evaluations with the argument passed in log scale; the
// exponent is clamped so the extreme flat regions stay finite.
double lower_at(double s, double lx) {
  return log_lower_gamma(s, std::exp(std::min(lx, 708.0)));
}
double upper_at(double s, double lx) {
  return log_upper_gamma(s, std::exp(std::min(lx, 708.0)));
}

// Bounded bisection: solve log_lower_gamma(s, e^lx) = target (increasing in
// lx) on [ln_lo, ln_hi].
double bisect_lower(double s, double target, double ln_lo, double ln_hi) {
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (ln_lo + ln_hi);
    if (lower_at(s, mid) < target)
      ln_lo = mid;
    else
      ln_hi = mid;
  }
  return 0.5 * (ln_lo + ln_hi);
}

// Bounded bisection against the (decreasing) upper gamma on [ln_lo, ln_hi].
double bisect_upper(double s, double target, double ln_lo, double ln_hi) {
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (ln_lo + ln_hi);
    if (upper_at(s, mid) > target)
      ln_lo = mid;
    else
      ln_hi = mid;
  }
  return 0.5 * (ln_lo + ln_hi);
}

// Solve log_lower_gamma(s, e^lx) = target with only an upper bound known
// (the left tail piece): expand downward, then bisect.
double invert_log_lower(double s, double target, double ln_hi_start) {
  double ln_hi = ln_hi_start;
  int guard = 0;
  while (lower_at(s, ln_hi) < target) {
    ln_hi += 32.0;
    if (++guard > 200)
      throw NumericalError("group sampler: lower-gamma bracket failed (high side)");
  }
  double step = 32.0 / std::max(1.0, s);
  double ln_lo = ln_hi - step;
  guard = 0;
  while (lower_at(s, ln_lo) > target) {
    step *= 2.0;
    ln_lo -= step;
    if (++guard > 200)
      throw NumericalError("group sampler: lower-gamma bracket failed (low side)");
  }
  return bisect_lower(s, target, ln_lo, ln_hi);
}

// Solve log_upper_gamma(s, e^lx) = target with only a lower bound known
// (the right tail piece): expand upward, then bisect.
double invert_log_upper(double s, double target, double ln_lo_start) {
  double ln_lo = ln_lo_start;
  int guard = 0;
  while (upper_at(s, ln_lo) < target) {
    ln_lo -= 32.0;
    if (++guard > 200)
      throw NumericalError("group sampler: upper-gamma bracket failed (low side)");
  }
  double step = 2.0;
  double ln_hi = ln_lo + step;
  guard = 0;
  while (upper_at(s, ln_hi) > target) {
    step *= 2.0;
    ln_hi += step;
    if (++guard > 200)
      throw NumericalError("group sampler: upper-gamma bracket failed (high side)");
  }
  return bisect_upper(s, target, ln_lo, ln_hi);
}

// Local-scale block shared by all kernels: tau_j | beta, sigma2 ~ GIG.
TauVector draw_tau_block(const ChainState& state, const Hyperparams& hp,
                         const ChainOptions& opts, RngStream& rng) {
  const int p = static_cast<int>(state.beta.size());
  TauVector tau(p);
  if (opts.clamp_zero_beta) {
    // Opt-in regularization of the a <= 1/2 impropriety at beta_j = 0:
    // floor |beta_j| at 1e-300 and, since its square still underflows, floor
    // the conditional's noncentrality at the smallest normal double so the
    // GIG stays proper.  For a > 1/2 the chi = 0 limit is a proper gamma and
    // needs no floor.
    const double lam = hp.a - 0.5;
    for (int j = 0; j < p; ++j) {
      double bj = state.beta[j];
      if (std::abs(bj) < 1e-300) bj = std::copysign(1e-300, bj);
      double chi = bj * bj / state.sigma2;
      if (lam <= 0.0)
        chi = std::max(chi, std::numeric_limits<double>::min());
      tau[j] = sample_gig(rng, GigParams{lam, chi, 2.0 * hp.b});
    }
    return tau;
  }
  const std::vector<GigParams> params = cond_tau(state, hp);
  for (int j = 0; j < p; ++j) tau[j] = sample_gig(rng, params[j]);
  return tau;
}

}  // namespace

std::string chain_kind_name(ChainKind kind) {
  switch (kind) {
    case ChainKind::kThreeBlock: return "three_block";
    case ChainKind::kTwoBlock: return "two_block";
    case ChainKind::kHaarPxDa: return "haar_pxda";
  }
  throw ConfigError("chain_kind_name: unknown chain kind");
}

ChainKind parse_chain_kind(const std::string& name) {
  if (name == "three_block") return ChainKind::kThreeBlock;
  if (name == "two_block") return ChainKind::kTwoBlock;
  if (name == "haar_pxda" || name == "sandwich") return ChainKind::kHaarPxDa;
  throw ConfigError("unknown chain kind '" + name +
                    "' (expected three_block, two_block, haar_pxda/sandwich)");
}

GroupElementSampler::GroupElementSampler(const TauVector& tau,
                                         const Dataset& data,
                                         const Hyperparams& hp) {
  if (!hp.pxda_permitted())
    throw ConfigError("the scale move requires xi > 0; it is disabled for xi = 0");
  p_ = data.p();
  if (tau.size() != p_)
    throw ConfigError("group sampler: tau length does not match dataset");
  for (int j = 0; j < p_; ++j)
    if (!(tau[j] > 0.0) || !std::isfinite(tau[j]))
      throw NumericalError("group sampler: tau must be positive and finite");

  theta_ = hp.b * tau.sum();
  ln_theta_ = std::log(theta_);
  elin_ = p_ * (hp.a - 0.5) - 1.0;
  qpow_ = 0.5 * data.n() + hp.alpha;
  yty2xi_ = data.yty + 2.0 * hp.xi;

  const Eigen::VectorXd w = tau.cwiseSqrt();
  const Eigen::MatrixXd whitened =
      w.asDiagonal() * data.gram * w.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(whitened);
  if (es.info() != Eigen::Success)
    throw NumericalError("group sampler: eigendecomposition failed");
  lam_ = es.eigenvalues().cwiseMax(0.0);  // ascending; PSD up to roundoff
  const Eigen::VectorXd c = es.eigenvectors().transpose() * w.cwiseProduct(data.xty);

  const double lam_top = lam_[p_ - 1];
  const double thresh = lam_top * 1e-12;
  rank_ = 0;
  for (int i = 0; i < p_; ++i)
    if (lam_[i] > thresh) ++rank_;
  // Rank components live at the tail of the ascending eigenvalue order.
  c2_ = c.tail(rank_).array().square();

  two_xi_ = 2.0 * hp.xi;
  s1_ = p_ * hp.a;
  s2_ = p_ * (hp.a - 0.5) + 0.5 * (p_ - rank_);

  if (rank_ == 0) {
    // X'Y and X'X vanish: f is exactly Gamma(pa, theta) and the cap matches
    // it pointwise, so every trial accepts.
    exact_gamma_ = true;
    exact_ln_b_ = -qpow_ * std::log(yty2xi_);
    return;
  }
  build_cells();
}

// Fit remainder Q(g); decreasing in g with infimum >= 2 xi, so evaluating it
// at a cell's right edge under-estimates it nowhere on the cell.
double GroupElementSampler::q_of(double g) const {
  const double inv_g = 1.0 / g;
  double fit = 0.0;
  for (int i = 0; i < rank_; ++i)
    fit += c2_[i] / (lam_[p_ - rank_ + i] + inv_g);
  return yty2xi_ - fit;
}

void GroupElementSampler::build_cells() {
  // Locate the mass-carrying window in u = ln(theta g): coarse scan for the
  // peak, then expand outward until the target drops ~e^-45 below it.
  const auto target_at = [this](double lnx) {
    return log_target(std::exp(lnx - ln_theta_));
  };
  const double scan_lo = std::log(1e-10);
  const double scan_hi = std::log(1e4);
  const int n_scan = 131;
  double peak = -kInf;
  double lnx_peak = 0.0;
  for (int i = 0; i < n_scan; ++i) {
    const double lnx = scan_lo + (scan_hi - scan_lo) * i / (n_scan - 1);
    const double v = target_at(lnx);
    if (v > peak) {
      peak = v;
      lnx_peak = lnx;
    }
  }
  if (!std::isfinite(peak))
    throw NumericalError("group sampler: the target is zero on the scan grid");
  const double kDrop = 45.0;
  const double kStep = 0.5;
  double hi = lnx_peak;
  for (int it = 0; it < 800; ++it) {
    const double v = target_at(hi + kStep);
    if (v > peak) peak = v;
    if (v <= peak - kDrop) break;
    hi += kStep;
  }
  double lo = lnx_peak;
  for (int it = 0; it < 800; ++it) {
    const double v = target_at(lo - kStep);
    if (v > peak) peak = v;
    if (v <= peak - kDrop) break;
    lo -= kStep;
  }

  // Narrow cells keep the per-cell caps tight; the unbounded edge pieces
  // make the envelope cover all of (0, inf) regardless of the window.
  const int n_cells =
      std::clamp(static_cast<int>(std::ceil((hi - lo) / 0.33)), 1, 96);
  cells_.clear();
  cells_.reserve(n_cells + 2);

  // Fill a bounded cell given its cap; anchor the area and later the inverse
  // CDF on whichever incomplete-gamma side avoids cancellation.
  const auto finite_cell = [this](double shape, double ln_b, double lx_lo,
                                  double lx_hi) {
    Cell c{lx_hi, shape, ln_b, -kInf, 0.0, false, -kInf, -kInf};
    const double llg_lo = (shape > 0.0) ? lower_at(shape, lx_lo) : kInf;
    const double lug_lo = upper_at(shape, lx_lo);
    if (shape > 0.0 && llg_lo <= lug_lo) {
      c.lower_anchored = true;
      c.anchor_lo = llg_lo;
      c.anchor_hi = lower_at(shape, lx_hi);
      const double d = std::min(c.anchor_lo - c.anchor_hi, 0.0);
      c.ln_area =
          ln_b - shape * ln_theta_ + c.anchor_hi + std::log1p(-std::exp(d));
    } else {
      c.anchor_lo = lug_lo;
      c.anchor_hi = upper_at(shape, lx_hi);
      const double d = std::min(c.anchor_hi - c.anchor_lo, 0.0);
      c.ln_area =
          ln_b - shape * ln_theta_ + c.anchor_lo + std::log1p(-std::exp(d));
    }
    return c;
  };

  // Left piece (0, x_0]: the g -> 0 cap integrates with shape p a > 0.
  {
    const double g0 = std::exp(lo - ln_theta_);
    const double ln_b = -qpow_ * std::log(std::max(q_of(g0), two_xi_));
    const double a_hi = lower_at(s1_, lo);
    cells_.push_back(
        Cell{lo, s1_, ln_b, ln_b - s1_ * ln_theta_ + a_hi, 0.0, true, -kInf,
             a_hi});
  }
  // Interior cells: on [g_lo, g_hi] both determinant bounds are valid; keep
  // whichever cap carries less area.
  const double width = (hi - lo) / n_cells;
  for (int j = 0; j < n_cells; ++j) {
    const double lx_lo = lo + width * j;
    const double lx_hi = (j + 1 == n_cells) ? hi : lo + width * (j + 1);
    const double g_lo = std::exp(lx_lo - ln_theta_);
    const double g_hi = std::exp(lx_hi - ln_theta_);
    const double ln_q = std::log(std::max(q_of(g_hi), two_xi_));
    double det_lo = 0.0;
    double det_hi = 0.0;
    for (int i = 0; i < rank_; ++i) {
      const double lam = lam_[p_ - rank_ + i];
      det_lo += std::log1p(lam * g_lo);
      det_hi += std::log(lam + 1.0 / g_hi);
    }
    const Cell cap1 =
        finite_cell(s1_, -qpow_ * ln_q - 0.5 * det_lo, lx_lo, lx_hi);
    const Cell cap2 =
        finite_cell(s2_, -qpow_ * ln_q - 0.5 * det_hi, lx_lo, lx_hi);
    cells_.push_back(cap1.ln_area <= cap2.ln_area ? cap1 : cap2);
  }
  // Right piece [x_K, inf): integrable for any shape since x_K > 0.
  {
    double fit_sup = 0.0;
    double sum_log_lam = 0.0;
    for (int i = 0; i < rank_; ++i) {
      fit_sup += c2_[i] / lam_[p_ - rank_ + i];
      sum_log_lam += std::log(lam_[p_ - rank_ + i]);
    }
    const double q_inf = std::max(yty2xi_ - fit_sup, two_xi_);
    const double ln_b = -qpow_ * std::log(q_inf) - 0.5 * sum_log_lam;
    const double a_lo = upper_at(s2_, hi);
    cells_.push_back(
        Cell{kInf, s2_, ln_b, ln_b - s2_ * ln_theta_ + a_lo, 0.0, false, a_lo,
             -kInf});
  }

  double ln_max = -kInf;
  for (const Cell& c : cells_) {
    if (std::isnan(c.ln_area))
      throw NumericalError("group sampler: cell area is NaN");
    ln_max = std::max(ln_max, c.ln_area);
  }
  if (!std::isfinite(ln_max))
    throw NumericalError("group sampler: envelope has no usable mass");
  double wsum = 0.0;
  for (const Cell& c : cells_) wsum += std::exp(c.ln_area - ln_max);
  double acc = 0.0;
  for (Cell& c : cells_) {
    acc += std::exp(c.ln_area - ln_max) / wsum;
    c.cum = acc;
  }
  cells_.back().cum = 1.0;
}

double GroupElementSampler::log_target(double g) const {
  if (!(g > 0.0) || !std::isfinite(g)) return -kInf;
  const double q = q_of(g);
  if (!(q > 0.0)) return -kInf;
  const double inv_g = 1.0 / g;
  double log_det = 0.0;
  for (int i = 0; i < p_; ++i) log_det += std::log(lam_[i] + inv_g);
  return elin_ * std::log(g) - theta_ * g - qpow_ * std::log(q) -
         0.5 * log_det;
}

double GroupElementSampler::log_envelope(double g) const {
  if (!(g > 0.0) || !std::isfinite(g)) return -kInf;
  const double lg = std::log(g);
  if (exact_gamma_) return exact_ln_b_ + (s1_ - 1.0) * lg - theta_ * g;
  const double lnx = lg + ln_theta_;
  const auto it = std::lower_bound(
      cells_.begin(), cells_.end(), lnx,
      [](const Cell& c, double v) { return c.ln_x_hi < v; });
  const Cell& c = (it == cells_.end()) ? cells_.back() : *it;
  return c.ln_b + (c.shape - 1.0) * lg - theta_ * g;
}

GroupElement GroupElementSampler::draw(RngStream& rng) {
  for (long long attempt = 0; attempt < kMaxTrialsPerDraw; ++attempt) {
    ++trials_;
    // Fixed protocol: every trial consumes exactly three uniforms
    // (cell selection, inverse-CDF position, accept/reject).
    const double u_sel = rng.uniform();
    const double u_pos = rng.uniform();
    const double u_acc = rng.uniform();

    double lx;  // log of x = theta * g
    if (exact_gamma_) {
      lx = invert_log_lower(s1_, std::lgamma(s1_) + std::log(u_pos),
                            std::log(std::max(s1_, 1.0)));
    } else {
      const auto it = std::lower_bound(
          cells_.begin(), cells_.end(), u_sel,
          [](const Cell& c, double u) { return c.cum < u; });
      const std::size_t k =
          (it == cells_.end()) ? cells_.size() - 1
                               : static_cast<std::size_t>(it - cells_.begin());
      const Cell& c = cells_[k];
      if (k == 0) {
        lx = std::min(invert_log_lower(c.shape, c.anchor_hi + std::log(u_pos),
                                       c.ln_x_hi),
                      c.ln_x_hi);
      } else if (k + 1 == cells_.size()) {
        const double lx_lo = cells_[k - 1].ln_x_hi;
        lx = std::max(
            invert_log_upper(c.shape, c.anchor_lo + std::log1p(-u_pos), lx_lo),
            lx_lo);
      } else {
        const double lx_lo = cells_[k - 1].ln_x_hi;
        if (c.lower_anchored) {
          const double q = std::exp(std::min(c.anchor_lo - c.anchor_hi, 0.0));
          const double tv = c.anchor_hi + std::log(q + u_pos * (1.0 - q));
          lx = bisect_lower(c.shape, tv, lx_lo, c.ln_x_hi);
        } else {
          const double q = std::exp(std::min(c.anchor_hi - c.anchor_lo, 0.0));
          const double tv = c.anchor_lo + std::log1p(-u_pos * (1.0 - q));
          lx = bisect_upper(c.shape, tv, lx_lo, c.ln_x_hi);
        }
      }
    }
    const double g = std::max(std::exp(lx - ln_theta_),
                              std::numeric_limits<double>::min());
    const double log_acc = log_target(g) - log_envelope(g);
    if (log_acc > kEnvelopeSlack)
      throw NumericalError(
          "group sampler: envelope violated (log excess " +
          std::to_string(log_acc) + " at g = " + std::to_string(g) +
          "); the domination bound is falsified");
    if (std::log(u_acc) <= log_acc) {
      ++draws_;
      return GroupElement{g};
    }
  }
  throw NumericalError(
      "group sampler: no candidate accepted within the trial cap");
}

GroupDraw sample_group_element(const TauVector& tau, const Dataset& data,
                               const Hyperparams& hp, RngStream& rng) {
  GroupElementSampler sampler(tau, data, hp);
  GroupDraw out;
  out.element = sampler.draw(rng);
  out.trials = sampler.trials();
  return out;
}

ThreeBlockKernel::ThreeBlockKernel(const Dataset& data, const Hyperparams& hp,
                                   ChainOptions opts)
    : data_(data), hp_(hp), opts_(opts) {}

ChainState ThreeBlockKernel::step(const ChainState& state, RngStream& rng) {
  last_tau_ = draw_tau_block(state, hp_, opts_, rng);
  // beta conditions on the incoming sigma2; sigma2 then refreshes given beta.
  ChainState next;
  next.beta = cond_beta(last_tau_, state.sigma2, data_).draw(rng);
  const InverseGammaParams ig =
      cond_sigma2_given_beta_tau(next.beta, last_tau_, data_, hp_);
  next.sigma2 = sample_inverse_gamma(rng, ig.shape, ig.rate);
  return next;
}

TwoBlockKernel::TwoBlockKernel(const Dataset& data, const Hyperparams& hp,
                               ChainOptions opts)
    : data_(data), hp_(hp), opts_(opts) {}

ChainState TwoBlockKernel::step(const ChainState& state, RngStream& rng) {
  last_tau_ = draw_tau_block(state, hp_, opts_, rng);
  // sigma2 first, from the beta-integrated conditional; beta conditions on
  // the fresh sigma2.
  const InverseGammaParams ig = cond_sigma2_given_tau(last_tau_, data_, hp_);
  ChainState next;
  next.sigma2 = sample_inverse_gamma(rng, ig.shape, ig.rate);
  next.beta = cond_beta(last_tau_, next.sigma2, data_).draw(rng);
  return next;
}

HaarPxDaKernel::HaarPxDaKernel(const Dataset& data, const Hyperparams& hp,
                               ChainOptions opts)
    : data_(data), hp_(hp), opts_(opts) {
  if (!hp_.pxda_permitted())
    throw ConfigError("the PX-DA chain requires xi > 0; it is disabled for xi = 0");
}

ChainState HaarPxDaKernel::step(const ChainState& state, RngStream& rng) {
  TauVector tau = draw_tau_block(state, hp_, opts_, rng);
  if (forced_g_.has_value()) {
    last_g_ = *forced_g_;  // pinned path: no randomness consumed
  } else {
    GroupElementSampler sampler(tau, data_, hp_);
    last_g_ = sampler.draw(rng).g;
    group_trials_ += sampler.trials();
    group_draws_ += sampler.draws();
  }
  tau *= last_g_;
  last_tau_ = tau;
  const InverseGammaParams ig = cond_sigma2_given_tau(tau, data_, hp_);
  ChainState next;
  next.sigma2 = sample_inverse_gamma(rng, ig.shape, ig.rate);
  next.beta = cond_beta(tau, next.sigma2, data_).draw(rng);
  return next;
}

namespace {

template <typename Kernel>
void run_loop(Kernel& kernel, const RunConfig& cfg, ChainState& state,
              RngStream& rng, std::vector<ChainState>& out) {
  for (std::int64_t m = 0; m < cfg.iterations; ++m) {
    try {
      state = kernel.step(state, rng);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (iteration " +
                           std::to_string(m) + ")");
    }
    const std::int64_t done = m + 1;
    if (done > cfg.burn_in && (done - cfg.burn_in) % cfg.thin == 0)
      out.push_back(state);
  }
}

}  // namespace

SampleTrace run_chain(const RunConfig& config, const Dataset& data,
                      const Hyperparams& hp) {
  RunConfig cfg = config;
  if (cfg.iterations <= 0) throw ConfigError("run_chain: iterations must be > 0");
  if (cfg.burn_in < 0) cfg.burn_in = cfg.iterations / 10;
  if (cfg.burn_in >= cfg.iterations)
    throw ConfigError("run_chain: burn_in must be smaller than iterations");
  if (cfg.thin <= 0) throw ConfigError("run_chain: thin must be > 0");

  ChainState state;
  if (cfg.init.has_value()) {
    state = *cfg.init;
    if (state.beta.size() != data.p())
      throw ConfigError("run_chain: init beta length does not match dataset");
    if (!(state.sigma2 > 0.0) || !std::isfinite(state.sigma2))
      throw ConfigError("run_chain: init sigma2 must be positive and finite");
  } else {
    state.beta = Eigen::VectorXd::Ones(data.p());
    state.sigma2 = 1.0;
  }

  RngStream rng(cfg.seed, cfg.stream_id);
  SampleTrace trace;
  trace.config = cfg;
  trace.states.reserve(static_cast<std::size_t>(
      (cfg.iterations - cfg.burn_in) / cfg.thin));

  switch (cfg.kind) {
    case ChainKind::kThreeBlock: {
      ThreeBlockKernel k(data, hp, cfg.options);
      run_loop(k, cfg, state, rng, trace.states);
      break;
    }
    case ChainKind::kTwoBlock: {
      TwoBlockKernel k(data, hp, cfg.options);
      run_loop(k, cfg, state, rng, trace.states);
      break;
    }
    case ChainKind::kHaarPxDa: {
      HaarPxDaKernel k(data, hp, cfg.options);
      run_loop(k, cfg, state, rng, trace.states);
      if (k.group_trials() > 0)
        trace.pxda_acceptance_rate = static_cast<double>(k.group_draws()) /
                                     static_cast<double>(k.group_trials());
      break;
    }
  }
  return trace;
}

}  // namespace ngmc
