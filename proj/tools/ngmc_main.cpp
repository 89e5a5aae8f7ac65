// Command-line front end: dataset simulation, autocorrelation experiments,
// the trace-class spectral probe, and a chain micro-benchmark.
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ngmc/chains.hpp"
#include "ngmc/csv.hpp"
#include "ngmc/errors.hpp"
#include "ngmc/experiment.hpp"
#include "ngmc/spectral.hpp"

namespace {

using namespace ngmc;

std::vector<ChainKind> parse_chain_list(const std::vector<std::string>& names) {
  std::vector<ChainKind> kinds;
  kinds.reserve(names.size());
  for (const std::string& name : names) kinds.push_back(parse_chain_kind(name));
  return kinds;
}

struct RunArgs {
  int n = 10;
  int p = 15;
  std::uint64_t data_seed = 1;
  std::string path_x, path_y;
  bool csv_header = false;
  double a = 0.75, b = 2.0, alpha = 0.0, xi = 100.0;
  std::vector<std::string> chains = {"three_block", "two_block", "haar_pxda"};
  std::int64_t iters = 100000, burn_in = 10000, thin = 1;
  int max_lag = 10;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string out = ".";
  bool clamp = false;
};

int do_run(const RunArgs& args) {
  ExperimentSpec spec;
  if (!args.path_x.empty() || !args.path_y.empty()) {
    if (args.path_x.empty() || args.path_y.empty())
      throw ConfigError("--x and --y must be given together");
    spec.dataset.kind = DatasetSource::Kind::kCsv;
    spec.dataset.path_x = args.path_x;
    spec.dataset.path_y = args.path_y;
    spec.dataset.csv_header = args.csv_header;
  } else {
    spec.dataset.kind = DatasetSource::Kind::kSimulate;
    spec.dataset.n = args.n;
    spec.dataset.p = args.p;
    spec.dataset.seed = args.data_seed;
  }
  spec.hyper = Hyperparams(args.a, args.b, args.alpha, args.xi);
  spec.chains = parse_chain_list(args.chains);
  spec.iterations = args.iters;
  spec.burn_in = args.burn_in;
  spec.thin = args.thin;
  spec.max_lag = args.max_lag;
  spec.replicate_seeds = args.seeds;
  spec.output_dir = args.out;
  spec.chain_options.clamp_zero_beta = args.clamp;

  const ExperimentResult res = run_experiment(spec);

  int failed = 0;
  for (const CellResult& cell : res.cells) {
    if (!cell.ok) {
      ++failed;
      std::fprintf(stderr, "cell %s seed %llu failed: %s\n",
                   chain_kind_name(cell.kind).c_str(),
                   static_cast<unsigned long long>(cell.seed),
                   cell.error.c_str());
    }
  }
  std::printf("across-seed median autocorrelation (lags 1..%d):\n",
              spec.max_lag);
  for (std::size_t c = 0; c < spec.chains.size(); ++c) {
    std::printf("  %-12s", chain_kind_name(spec.chains[c]).c_str());
    for (const double v : res.table[c]) std::printf(" %7.4f", v);
    std::printf("\n");
  }
  std::printf("wrote %zu files to %s\n", res.files_written.size(),
              spec.output_dir.c_str());
  if (failed) {
    std::fprintf(stderr, "%d of %zu cells failed\n", failed, res.cells.size());
    return 2;
  }
  return 0;
}

int do_simulate(int n, int p, std::uint64_t seed, const std::string& out) {
  const Dataset data = simulate_dataset(n, p, seed);
  std::filesystem::create_directories(out);
  const std::string px = (std::filesystem::path(out) / "X.csv").string();
  const std::string py = (std::filesystem::path(out) / "Y.csv").string();
  write_csv_matrix(px, data.X);
  write_csv_matrix(py, data.Y);
  std::printf("wrote %s (%dx%d) and %s (%d)\n", px.c_str(), n, p, py.c_str(),
              n);
  return 0;
}

struct SpectralArgs {
  std::vector<double> a_values = {0.3, 0.5, 0.75, 1.5};
  double b = 1.0, alpha = 1.0, xi = 1.0;
  double sigma2 = 1.0;
  std::string path_x, path_y;
  bool csv_header = false;
  std::vector<double> cutoffs;
  double beta_max = 0.0;
  std::string out = ".";
};

int do_spectral(const SpectralArgs& args) {
  std::optional<Dataset> instance;
  if (!args.path_x.empty() || !args.path_y.empty()) {
    if (args.path_x.empty() || args.path_y.empty())
      throw ConfigError("--x and --y must be given together");
    instance.emplace(load_csv(args.path_x, args.path_y, args.csv_header));
  } else {
    instance.emplace(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1));
  }
  const Hyperparams rest(0.75, args.b, args.alpha, args.xi);
  TraceProbeOptions opt;
  if (!args.cutoffs.empty()) opt.cutoffs = args.cutoffs;
  if (args.beta_max > 0.0) opt.beta_max = args.beta_max;

  const SpectralProbeResult res = run_spectral_probe(
      args.a_values, *instance, rest, args.out, opt, args.sigma2);
  for (const SpectralProbeEntry& entry : res.entries) {
    if (entry.ok) {
      std::printf("a=%-6g %-22s slope=%.4g (se %.2g)  small-beta slope=%.4g\n",
                  entry.a, trace_verdict_name(entry.report.verdict),
                  entry.report.slope, entry.report.slope_std_err,
                  entry.small_beta_slope);
    } else {
      std::printf("a=%-6g FAILED: %s\n", entry.a, entry.error.c_str());
    }
  }
  std::printf("wrote %s\n", res.file.c_str());
  return 0;
}

struct BenchArgs {
  int n = 10;
  int p = 15;
  std::uint64_t seed = 1;
  double a = 0.75, b = 2.0, alpha = 0.0, xi = 100.0;
  std::int64_t iters = 10000;
  std::vector<std::string> chains = {"three_block", "two_block", "haar_pxda"};
};

int do_bench(const BenchArgs& args) {
  const Dataset data = simulate_dataset(args.n, args.p, args.seed);
  const Hyperparams hp(args.a, args.b, args.alpha, args.xi);
  for (const ChainKind kind : parse_chain_list(args.chains)) {
    RunConfig rc;
    rc.kind = kind;
    rc.iterations = args.iters;
    rc.burn_in = 0;
    rc.seed = args.seed;
    rc.stream_id = static_cast<std::uint64_t>(kind);
    const auto t0 = std::chrono::steady_clock::now();
    const SampleTrace trace = run_chain(rc, data, hp);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    std::printf("%-12s %lld iterations in %.3f s (%.3g it/s)",
                chain_kind_name(kind).c_str(),
                static_cast<long long>(args.iters), secs,
                static_cast<double>(args.iters) / secs);
    if (trace.pxda_acceptance_rate)
      std::printf("  group-move acceptance %.3f", *trace.pxda_acceptance_rate);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Normal-Gamma shrinkage regression: Gibbs and sandwich samplers, "
      "autocorrelation experiments, and a trace-class spectral probe"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI-style file");

  // simulate
  int sim_n = 10, sim_p = 15;
  std::uint64_t sim_seed = 1;
  std::string sim_out = ".";
  CLI::App* sim = app.add_subcommand(
      "simulate", "Draw a standard-normal design and response, write CSV");
  sim->add_option("--n", sim_n, "Rows of the design")->capture_default_str();
  sim->add_option("--p", sim_p, "Columns of the design")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Simulation seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output directory")->capture_default_str();

  // run
  RunArgs run_args;
  CLI::App* run = app.add_subcommand(
      "run", "Run the chains and emit ACF tables and summaries");
  run->add_option("--n", run_args.n, "Simulated design rows")
      ->capture_default_str();
  run->add_option("--p", run_args.p, "Simulated design columns")
      ->capture_default_str();
  run->add_option("--data-seed", run_args.data_seed, "Dataset simulation seed")
      ->capture_default_str();
  run->add_option("--x", run_args.path_x, "Design CSV (overrides simulation)");
  run->add_option("--y", run_args.path_y, "Response CSV");
  run->add_flag("--csv-header", run_args.csv_header,
                "Skip one header row in --x/--y");
  run->add_option("--a", run_args.a, "Local-scale shape")->capture_default_str();
  run->add_option("--b", run_args.b, "Local-scale rate")->capture_default_str();
  run->add_option("--alpha", run_args.alpha, "Variance prior shape")
      ->capture_default_str();
  run->add_option("--xi", run_args.xi, "Variance prior rate")
      ->capture_default_str();
  run->add_option("--chains", run_args.chains,
                  "Chain kinds: three_block two_block haar_pxda|sandwich")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--iters", run_args.iters, "Iterations per chain")
      ->capture_default_str();
  run->add_option("--burn-in", run_args.burn_in,
                  "Burn-in (negative = iterations/10)")
      ->capture_default_str();
  run->add_option("--thin", run_args.thin, "Keep every thin-th state")
      ->capture_default_str();
  run->add_option("--max-lag", run_args.max_lag, "Autocorrelation lags")
      ->capture_default_str();
  run->add_option("--seeds", run_args.seeds, "Replicate chain seeds")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--out", run_args.out, "Output directory")
      ->capture_default_str();
  run->add_flag("--clamp-zero-beta", run_args.clamp,
                "Clamp |beta_j| at 1e-300 before local-scale draws");

  // spectral
  SpectralArgs sp_args;
  CLI::App* sp = app.add_subcommand(
      "spectral", "Trace-class probe of the two-block operator's diagonal");
  sp->add_option("--a-values", sp_args.a_values, "Shape values to probe")
      ->delimiter(',')
      ->capture_default_str();
  sp->add_option("--b", sp_args.b, "Local-scale rate")->capture_default_str();
  sp->add_option("--alpha", sp_args.alpha, "Variance prior shape")
      ->capture_default_str();
  sp->add_option("--xi", sp_args.xi, "Variance prior rate")
      ->capture_default_str();
  sp->add_option("--sigma2", sp_args.sigma2,
                 "Variance used by the small-beta slope check")
      ->capture_default_str();
  sp->add_option("--x", sp_args.path_x, "p=1 design CSV (default: unit instance)");
  sp->add_option("--y", sp_args.path_y, "Response CSV");
  sp->add_flag("--csv-header", sp_args.csv_header,
               "Skip one header row in --x/--y");
  sp->add_option("--cutoffs", sp_args.cutoffs,
                 "Decreasing inner cutoffs (default 1e-2..1e-9)")
      ->delimiter(',');
  sp->add_option("--beta-max", sp_args.beta_max, "Outer truncation (default 1e3)");
  sp->add_option("--out", sp_args.out, "Output directory")
      ->capture_default_str();

  // bench
  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Time the chain kernels");
  bench->add_option("--n", bench_args.n, "Simulated design rows")
      ->capture_default_str();
  bench->add_option("--p", bench_args.p, "Simulated design columns")
      ->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "Seed")->capture_default_str();
  bench->add_option("--a", bench_args.a, "Local-scale shape")
      ->capture_default_str();
  bench->add_option("--b", bench_args.b, "Local-scale rate")
      ->capture_default_str();
  bench->add_option("--alpha", bench_args.alpha, "Variance prior shape")
      ->capture_default_str();
  bench->add_option("--xi", bench_args.xi, "Variance prior rate")
      ->capture_default_str();
  bench->add_option("--iters", bench_args.iters, "Iterations")
      ->capture_default_str();
  bench->add_option("--chains", bench_args.chains, "Chain kinds to time")
      ->delimiter(',')
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return do_simulate(sim_n, sim_p, sim_seed, sim_out);
    if (run->parsed()) return do_run(run_args);
    if (sp->parsed()) return do_spectral(sp_args);
    if (bench->parsed()) return do_bench(bench_args);
    return 1;
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 1;
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 1;
  } catch (const NumericalError& err) {
    std::fprintf(stderr, "numerical error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
}
