#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ngmc/chains.hpp"
#include "ngmc/model.hpp"
#include "ngmc/spectral.hpp"

namespace ngmc {

// Draws an n x p design and a length-n response with every entry an
// independent standard normal from one seeded stream (X filled row by row,
// then Y). The same (n, p, seed) always yields the same dataset.
Dataset simulate_dataset(int n, int p, std::uint64_t seed);

// Where the experiment's data comes from: a seeded simulation or a CSV pair.
struct DatasetSource {
  enum class Kind { kSimulate, kCsv };
  Kind kind = Kind::kSimulate;
  // simulate
  int n = 10;
  int p = 15;
  std::uint64_t seed = 1;
  // csv
  std::string path_x;
  std::string path_y;
  bool csv_header = false;  // skip one header row in both files
};

// Full description of one autocorrelation experiment.
struct ExperimentSpec {
  DatasetSource dataset;
  Hyperparams hyper{0.75, 2.0, 0.0, 100.0};
  std::vector<ChainKind> chains{ChainKind::kThreeBlock, ChainKind::kTwoBlock,
                                ChainKind::kHaarPxDa};
  std::int64_t iterations = 100000;
  std::int64_t burn_in = 10000;
  std::int64_t thin = 1;
  int max_lag = 10;
  std::vector<std::uint64_t> replicate_seeds = {1, 2, 3, 4, 5,
                                                6, 7, 8, 9, 10};
  std::string output_dir = ".";
  ChainOptions chain_options;
};

// Outcome of one (chain kind, seed) cell. A failed cell carries the error
// text and empty diagnostics.
struct CellResult {
  ChainKind kind = ChainKind::kThreeBlock;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<double> acf;  // lags 1..max_lag
  double ess = 0.0;
  std::optional<double> pxda_acceptance;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // chain-major, seed-minor, spec order
  // Across-seed medians of the ACF, one row per requested chain, one column
  // per lag 1..max_lag; NaN where every seed failed.
  std::vector<std::vector<double>> table;
  std::vector<std::string> files_written;
};

// Runs every (chain kind, seed) cell of the configuration, computes the scalar
// functional ||Y - X beta||^2 + sigma^2 per kept state, and emits into
// output_dir: acf_<chain>_<seed>.csv (columns lag,acf), summary.json
// (schema_version, configuration echo, per-cell diagnostics), and table.csv (one row
// per chain, across-seed median ACF at lags 1..max_lag, 4 decimals).
// ConfigError on an invalid configuration (no chains, no seeds, max_lag < 1, bad
// dataset source). A cell whose chain fails is recorded and skipped; the
// remaining cells still run. Outputs are byte-identical across runs of the
// same spec except for the wall_seconds fields in summary.json.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// One entry of the spectral probe report: the trace-class evidence for one
// shape value plus the small-coefficient slope diagnostic.
struct SpectralProbeEntry {
  double a = 0.0;
  bool ok = false;
  std::string error;
  TraceProbeReport report;        // valid when ok
  double small_beta_slope = 0.0;  // valid when ok
};

struct SpectralProbeResult {
  std::vector<SpectralProbeEntry> entries;
  std::string file;  // path of spectral.json
};

// Runs the trace-class probe at each shape value on a p = 1 instance and
// writes spectral.json into output_dir. ConfigError if a_values is empty or
// contains a <= 0, or if the instance has p != 1. A numerical failure at one
// shape value is recorded in its entry; the remaining values still run.
SpectralProbeResult run_spectral_probe(const std::vector<double>& a_values,
                                       const Dataset& instance,
                                       const Hyperparams& hp_rest,
                                       const std::string& output_dir,
                                       const TraceProbeOptions& opt = {},
                                       double small_beta_sigma2 = 1.0);

}  // namespace ngmc
