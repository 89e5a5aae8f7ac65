#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "ngmc/chains.hpp"
#include "ngmc/diagnostics.hpp"
#include "ngmc/errors.hpp"
#include "ngmc/model.hpp"
#include "ngmc/quadrature.hpp"
#include "ngmc/rng.hpp"

using namespace ngmc;

namespace {

Dataset simulated_dataset(int n, int p, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  return Dataset(x, y);
}

Dataset zero_design(int n, int p, std::uint64_t seed) {
  RngStream rng(seed);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  return Dataset(Eigen::MatrixXd::Zero(n, p), y);
}

// Empirical KS distance of draws against a numeric CDF of the sampler's own
// unnormalized log density, computed by a dense trapezoid rule in log g.
double ks_against_quadrature(const GroupElementSampler& sampler,
                             std::vector<double> draws) {
  // Locate the peak of the log-space integrand psi(e^t) + t.
  auto log_f = [&](double t) { return sampler.log_target(std::exp(t)) + t; };
  double t_peak = 0.0, best = -1e300;
  for (double t = -60.0; t <= 60.0; t += 0.05) {
    const double v = log_f(t);
    if (v > best) {
      best = v;
      t_peak = t;
    }
  }
  const LogBracket br = bracket_log_peak(log_f, t_peak, 60.0, -745.0, 745.0);
  const int m = 1 << 16;
  const double dt = (br.hi - br.lo) / m;
  std::vector<double> grid(m + 1), cdf(m + 1);
  for (int k = 0; k <= m; ++k) {
    grid[k] = br.lo + k * dt;
    cdf[k] = std::exp(log_f(grid[k]) - best);
  }
  double acc = 0.0;
  std::vector<double> cum(m + 1, 0.0);
  for (int k = 1; k <= m; ++k) {
    acc += 0.5 * (cdf[k - 1] + cdf[k]) * dt;
    cum[k] = acc;
  }
  for (auto& v : cum) v /= acc;

  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double t = std::log(draws[i]);
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    double f;
    if (it == grid.begin())
      f = 0.0;
    else if (it == grid.end())
      f = 1.0;
    else {
      const std::size_t k = static_cast<std::size_t>(it - grid.begin());
      const double w = (t - grid[k - 1]) / dt;
      f = cum[k - 1] + w * (cum[k] - cum[k - 1]);
    }
    ks = std::max(ks, std::abs(f - (static_cast<double>(i) + 1.0) / n));
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
  }
  return ks;
}

}  // namespace

TEST_CASE("chain kind names round-trip and accept the sandwich alias") {
  CHECK(chain_kind_name(ChainKind::kThreeBlock) == "three_block");
  CHECK(chain_kind_name(ChainKind::kTwoBlock) == "two_block");
  CHECK(chain_kind_name(ChainKind::kHaarPxDa) == "haar_pxda");
  CHECK(parse_chain_kind("three_block") == ChainKind::kThreeBlock);
  CHECK(parse_chain_kind("two_block") == ChainKind::kTwoBlock);
  CHECK(parse_chain_kind("haar_pxda") == ChainKind::kHaarPxDa);
  CHECK(parse_chain_kind("sandwich") == ChainKind::kHaarPxDa);
  CHECK_THROWS_AS(parse_chain_kind("gibbs"), ConfigError);
}

TEST_CASE("the sigma2-given-tau conditional takes no beta argument") {
  // The two-block and PX-DA sweeps draw sigma2 before the new beta exists;
  // the API enforces that ordering by construction.
  static_assert(
      std::is_invocable_r_v<InverseGammaParams,
                            decltype(&cond_sigma2_given_tau), const TauVector&,
                            const Dataset&, const Hyperparams&>);
  static_assert(!std::is_invocable_v<decltype(&cond_sigma2_given_tau),
                                     const Eigen::VectorXd&, const TauVector&,
                                     const Dataset&, const Hyperparams&>);
  CHECK(true);
}

TEST_CASE("pinning g = 1 makes the PX-DA sweep reproduce the two-block sweep") {
  const Dataset data = simulated_dataset(6, 4, 11);
  const Hyperparams hp(0.75, 2.0, 0.5, 1.5);
  TwoBlockKernel two(data, hp);
  HaarPxDaKernel pxda(data, hp);
  pxda.force_group_element(1.0);

  RngStream rng_two(42), rng_pxda(42);
  ChainState s_two{Eigen::VectorXd::Ones(4), 1.0};
  ChainState s_pxda = s_two;
  for (int m = 0; m < 200; ++m) {
    s_two = two.step(s_two, rng_two);
    s_pxda = pxda.step(s_pxda, rng_pxda);
    REQUIRE(s_two.sigma2 == s_pxda.sigma2);  // bitwise
    for (int j = 0; j < 4; ++j) REQUIRE(s_two.beta[j] == s_pxda.beta[j]);
  }
  CHECK(pxda.last_group_element() == 1.0);
  CHECK(pxda.group_trials() == 0);  // pinned path consumed no candidates

  // Un-pinning restores the real move.
  pxda.clear_forced_group_element();
  s_pxda = pxda.step(s_pxda, rng_pxda);
  CHECK(pxda.group_trials() > 0);
  CHECK(pxda.last_group_element() > 0.0);
}

TEST_CASE("zero design: the chain reproduces the factorized posterior") {
  // With X = 0 the posterior factorizes: sigma2 ~ InvGamma(alpha + n/2,
  // (Y'Y + 2 xi)/2), tau_j keeps its Gamma(a, b) prior, and beta_j given
  // (sigma2, tau) is centered normal with variance sigma2 * tau_j.
  const Dataset data = zero_design(4, 2, 7);
  const Hyperparams hp(1.2, 0.7, 1.0, 0.8);
  const double post_shape = hp.alpha + 0.5 * data.n();
  const double post_rate = 0.5 * (data.yty + 2.0 * hp.xi);
  const double want_sigma2 = post_rate / (post_shape - 1.0);
  const double want_beta_sq = want_sigma2 * hp.a / hp.b;

  RunConfig cfg;
  cfg.kind = ChainKind::kThreeBlock;
  cfg.iterations = 30000;
  cfg.burn_in = 2000;
  cfg.seed = 5;
  const SampleTrace trace = run_chain(cfg, data, hp);
  REQUIRE(trace.states.size() == 28000);

  std::vector<double> s2, b1, b1sq;
  for (const auto& st : trace.states) {
    s2.push_back(st.sigma2);
    b1.push_back(st.beta[0]);
    b1sq.push_back(st.beta[0] * st.beta[0]);
  }
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  CHECK(std::abs(mean_of(s2) - want_sigma2) < 4.0 * batch_means_stderr(s2));
  CHECK(std::abs(mean_of(b1)) < 4.0 * batch_means_stderr(b1));
  CHECK(std::abs(mean_of(b1sq) - want_beta_sq) <
        4.0 * batch_means_stderr(b1sq));
}

TEST_CASE("zero design, p = 1: the group move is exactly gamma") {
  const Dataset data = zero_design(3, 1, 21);
  const Hyperparams hp(1.3, 0.9, 0.0, 2.0);
  TauVector tau(1);
  tau << 1.7;
  GroupElementSampler sampler(tau, data, hp);

  // Target and envelope coincide: every candidate is accepted.
  for (double lg = -12.0; lg <= 12.0; lg += 0.5) {
    const double g = std::exp(lg);
    CHECK(std::abs(sampler.log_target(g) - sampler.log_envelope(g)) < 1e-10);
  }

  RngStream rng(33);
  const int n_draws = 20000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n_draws; ++i) {
    const double g = sampler.draw(rng).g;
    sum += g;
    sum_sq += g * g;
  }
  CHECK(sampler.trials() == sampler.draws());  // nothing rejected
  const double mean = sum / n_draws;
  const double want_mean = hp.a / (hp.b * tau[0]);  // Gamma(a, b*tau) mean
  const double sd = std::sqrt(sum_sq / n_draws - mean * mean);
  CHECK(std::abs(mean - want_mean) < 3.0 * sd / std::sqrt(double(n_draws)));
}

TEST_CASE("the group-move envelope dominates the target everywhere") {
  RngStream rng(1001);
  int checked = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 1 + (rng.raw() % 8);
    const int p = 1 + (rng.raw() % 6);
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
    // A third of the instances get a crippled design: a zeroed column (rank
    // deficiency) or a fully zero matrix.
    if (inst % 3 == 0) x.col(0).setZero();
    if (inst % 17 == 0) x.setZero();
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    const Dataset data(x, y);

    // Mix of shapes, including the a <= 1/2 fallback mode; wide tau spread.
    const double a = (inst % 5 == 0) ? 0.3 + 0.15 * rng.uniform()
                                     : 0.55 + 2.5 * rng.uniform();
    const Hyperparams hp(a, 0.1 + 3.0 * rng.uniform(), 2.0 * rng.uniform(),
                         std::exp(4.0 * rng.normal()));
    TauVector tau(p);
    for (int j = 0; j < p; ++j) tau[j] = std::exp(2.0 * rng.normal());

    GroupElementSampler sampler(tau, data, hp);
    for (int k = 0; k <= 48; ++k) {
      const double g = std::pow(10.0, -6.0 + 12.0 * k / 48.0);
      const double gap = sampler.log_target(g) - sampler.log_envelope(g);
      REQUIRE(gap <= 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 100 * 49);
}

TEST_CASE("group-move draws match the quadrature distribution") {
  const Dataset data = simulated_dataset(10, 15, 61);
  const Hyperparams hp(0.75, 2.0, 0.0, 100.0);
  RngStream tau_rng(8);
  TauVector tau(15);
  for (int j = 0; j < 15; ++j) tau[j] = std::exp(0.8 * tau_rng.normal());

  GroupElementSampler sampler(tau, data, hp);
  RngStream rng(99);
  std::vector<double> draws(20000);
  for (auto& d : draws) d = sampler.draw(rng).g;
  const double ks = ks_against_quadrature(sampler, draws);
  CHECK(ks < 0.015);
  // The two-cap envelope keeps rejection practical.
  CHECK(sampler.trials() < 60LL * sampler.draws());
}

TEST_CASE("all three sweeps share one stationary distribution") {
  const Dataset data = simulated_dataset(5, 3, 3);
  const Hyperparams hp(0.75, 2.0, 1.0, 1.0);
  const std::vector<ChainKind> kinds{
      ChainKind::kThreeBlock, ChainKind::kTwoBlock, ChainKind::kHaarPxDa};

  struct Summary {
    double mean_s2, se_s2, mean_b1, se_b1, mean_f, se_f;
  };
  std::vector<Summary> sums;
  for (ChainKind kind : kinds) {
    RunConfig cfg;
    cfg.kind = kind;
    cfg.iterations = 40000;
    cfg.burn_in = 4000;
    cfg.seed = 17;
    const SampleTrace trace = run_chain(cfg, data, hp);
    std::vector<double> s2, b1;
    for (const auto& st : trace.states) {
      s2.push_back(st.sigma2);
      b1.push_back(st.beta[0]);
    }
    const std::vector<double> f = functional_series(trace.states, data);
    auto mean_of = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    sums.push_back(Summary{mean_of(s2), batch_means_stderr(s2), mean_of(b1),
                           batch_means_stderr(b1), mean_of(f),
                           batch_means_stderr(f)});
  }
  for (std::size_t i = 0; i < sums.size(); ++i) {
    for (std::size_t j = i + 1; j < sums.size(); ++j) {
      CHECK(std::abs(sums[i].mean_s2 - sums[j].mean_s2) <
            4.0 * std::hypot(sums[i].se_s2, sums[j].se_s2));
      CHECK(std::abs(sums[i].mean_b1 - sums[j].mean_b1) <
            4.0 * std::hypot(sums[i].se_b1, sums[j].se_b1));
      CHECK(std::abs(sums[i].mean_f - sums[j].mean_f) <
            4.0 * std::hypot(sums[i].se_f, sums[j].se_f));
    }
  }
}

TEST_CASE("run_chain recording, determinism, and configuration echo") {
  const Dataset data = simulated_dataset(4, 2, 2);
  const Hyperparams hp(0.9, 1.0, 0.5, 0.5);

  RunConfig cfg;
  cfg.kind = ChainKind::kTwoBlock;
  cfg.iterations = 100;
  cfg.burn_in = 50;
  cfg.thin = 5;
  cfg.seed = 123;
  SampleTrace t1 = run_chain(cfg, data, hp);
  CHECK(t1.states.size() == 10);
  CHECK_FALSE(t1.pxda_acceptance_rate.has_value());
  CHECK(t1.config.burn_in == 50);

  SampleTrace t2 = run_chain(cfg, data, hp);
  REQUIRE(t2.states.size() == t1.states.size());
  for (std::size_t k = 0; k < t1.states.size(); ++k) {
    CHECK(t1.states[k].sigma2 == t2.states[k].sigma2);
    CHECK(t1.states[k].beta == t2.states[k].beta);
  }

  cfg.stream_id = 1;  // a different stream decorrelates
  SampleTrace t3 = run_chain(cfg, data, hp);
  CHECK(t3.states.back().sigma2 != t1.states.back().sigma2);

  // Auto burn-in resolves to a tenth of the iterations.
  RunConfig auto_cfg;
  auto_cfg.kind = ChainKind::kThreeBlock;
  auto_cfg.iterations = 200;
  auto_cfg.seed = 9;
  SampleTrace t4 = run_chain(auto_cfg, data, hp);
  CHECK(t4.config.burn_in == 20);
  CHECK(t4.states.size() == 180);

  RunConfig bad = cfg;
  bad.iterations = 0;
  CHECK_THROWS_AS(run_chain(bad, data, hp), ConfigError);
  bad = cfg;
  bad.burn_in = 100;
  CHECK_THROWS_AS(run_chain(bad, data, hp), ConfigError);
  bad = cfg;
  bad.thin = 0;
  CHECK_THROWS_AS(run_chain(bad, data, hp), ConfigError);
  bad = cfg;
  bad.init = ChainState{Eigen::VectorXd::Ones(5), 1.0};
  CHECK_THROWS_AS(run_chain(bad, data, hp), ConfigError);
  bad = cfg;
  bad.init = ChainState{Eigen::VectorXd::Ones(2), -1.0};
  CHECK_THROWS_AS(run_chain(bad, data, hp), ConfigError);
}

TEST_CASE("PX-DA requires a proper sigma2 prior tail") {
  const Dataset data = simulated_dataset(4, 2, 5);
  const Hyperparams improper(0.75, 2.0, 1.0, 0.0);  // xi = 0
  RunConfig cfg;
  cfg.kind = ChainKind::kHaarPxDa;
  cfg.iterations = 10;
  cfg.burn_in = 0;
  CHECK_THROWS_AS(run_chain(cfg, data, improper), ConfigError);
  TauVector tau = TauVector::Ones(2);
  RngStream rng(1);
  CHECK_THROWS_AS(sample_group_element(tau, data, improper, rng), ConfigError);
}

TEST_CASE("PX-DA acceptance accounting lands in (0, 1]") {
  const Dataset data = simulated_dataset(5, 3, 3);
  const Hyperparams hp(0.75, 2.0, 1.0, 1.0);
  RunConfig cfg;
  cfg.kind = ChainKind::kHaarPxDa;
  cfg.iterations = 500;
  cfg.burn_in = 0;
  cfg.seed = 31;
  const SampleTrace trace = run_chain(cfg, data, hp);
  REQUIRE(trace.pxda_acceptance_rate.has_value());
  CHECK(*trace.pxda_acceptance_rate > 0.0);
  CHECK(*trace.pxda_acceptance_rate <= 1.0);

  RngStream rng(77);
  TauVector tau = TauVector::Ones(3) * 0.4;
  const GroupDraw d = sample_group_element(tau, data, hp, rng);
  CHECK(d.element.g > 0.0);
  CHECK(d.trials >= 1);
}

TEST_CASE("hard-zero beta: error by default, clamp when opted in") {
  const Dataset data = simulated_dataset(4, 2, 13);
  const Hyperparams hp(0.3, 1.0, 1.0, 1.0);  // a <= 1/2: zero beta is fatal
  ChainState stuck{Eigen::VectorXd::Zero(2), 1.0};

  TwoBlockKernel strict(data, hp);
  RngStream rng(3);
  CHECK_THROWS_AS(strict.step(stuck, rng), NumericalError);

  ChainOptions opts;
  opts.clamp_zero_beta = true;
  TwoBlockKernel clamped(data, hp, opts);
  const ChainState next = clamped.step(stuck, rng);
  CHECK(std::isfinite(next.sigma2));

  // run_chain attaches the failing iteration index.
  RunConfig cfg;
  cfg.kind = ChainKind::kTwoBlock;
  cfg.iterations = 10;
  cfg.burn_in = 0;
  cfg.init = stuck;
  try {
    run_chain(cfg, data, hp);
    CHECK(false);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
  }
  cfg.options.clamp_zero_beta = true;
  CHECK(run_chain(cfg, data, hp).states.size() == 10);
}
