#include "ngmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "ngmc/csv.hpp"
#include "ngmc/diagnostics.hpp"
#include "ngmc/errors.hpp"
#include "ngmc/rng.hpp"

namespace ngmc {
namespace {

using nlohmann::json;

std::string fmt4(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open file for writing");
  out << body;
  if (!out) throw ConfigError(path + ": write failed");
}

Dataset materialize(const DatasetSource& src,
                    std::vector<std::string>* warnings) {
  if (src.kind == DatasetSource::Kind::kSimulate) {
    return simulate_dataset(src.n, src.p, src.seed);
  }
  return load_csv(src.path_x, src.path_y, src.csv_header, warnings);
}

CellResult run_cell(ChainKind kind, std::uint64_t seed, const Dataset& data,
                    const ExperimentSpec& spec) {
  CellResult cell;
  cell.kind = kind;
  cell.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunConfig rc;
    rc.kind = kind;
    rc.iterations = spec.iterations;
    rc.burn_in = spec.burn_in;
    rc.thin = spec.thin;
    rc.seed = seed;
    rc.stream_id = static_cast<std::uint64_t>(kind);
    rc.options = spec.chain_options;
    const SampleTrace trace = run_chain(rc, data, spec.hyper);
    const std::vector<double> series = functional_series(trace.states, data);
    const AcfReport rep = autocorrelation(series, spec.max_lag);
    cell.acf = rep.acf;
    cell.ess = effective_sample_size(series);
    cell.pxda_acceptance = trace.pxda_acceptance_rate;
    cell.ok = true;
  } catch (const std::exception& err) {
    cell.ok = false;
    cell.error = err.what();
  }
  const auto t1 = std::chrono::steady_clock::now();
  cell.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return cell;
}

json spec_to_json(const ExperimentSpec& spec, std::int64_t resolved_burn) {
  json d;
  if (spec.dataset.kind == DatasetSource::Kind::kSimulate) {
    d["kind"] = "simulate";
    d["n"] = spec.dataset.n;
    d["p"] = spec.dataset.p;
    d["seed"] = spec.dataset.seed;
  } else {
    d["kind"] = "csv";
    d["path_x"] = spec.dataset.path_x;
    d["path_y"] = spec.dataset.path_y;
    d["header"] = spec.dataset.csv_header;
  }
  json chains = json::array();
  for (const ChainKind kind : spec.chains) chains.push_back(chain_kind_name(kind));
  json out;
  out["dataset"] = d;
  out["hyper"] = {{"a", spec.hyper.a},
                  {"b", spec.hyper.b},
                  {"alpha", spec.hyper.alpha},
                  {"xi", spec.hyper.xi}};
  out["chains"] = chains;
  out["iterations"] = spec.iterations;
  out["burn_in"] = resolved_burn;
  out["thin"] = spec.thin;
  out["max_lag"] = spec.max_lag;
  out["seeds"] = spec.replicate_seeds;
  out["clamp_zero_beta"] = spec.chain_options.clamp_zero_beta;
  return out;
}

}  // namespace

Dataset simulate_dataset(int n, int p, std::uint64_t seed) {
  if (n < 1 || p < 1)
    throw ConfigError("simulate_dataset: n and p must be at least 1");
  RngStream rng(seed);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = rng.normal();
  return Dataset(std::move(x), std::move(y));
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.chains.empty())
    throw ConfigError("run_experiment: at least one chain kind is required");
  if (spec.replicate_seeds.empty())
    throw ConfigError("run_experiment: at least one replicate seed is required");
  if (spec.max_lag < 1)
    throw ConfigError("run_experiment: max_lag must be at least 1");
  if (spec.iterations < 1 || spec.thin < 1)
    throw ConfigError("run_experiment: iterations and thin must be positive");
  const std::int64_t resolved_burn =
      spec.burn_in < 0 ? spec.iterations / 10 : spec.burn_in;
  if (resolved_burn >= spec.iterations)
    throw ConfigError("run_experiment: burn-in must leave iterations to keep");
  const std::int64_t kept = (spec.iterations - resolved_burn) / spec.thin;
  if (kept <= 3 * static_cast<std::int64_t>(spec.max_lag)) {
    throw ConfigError(
        "run_experiment: the kept sample is too short for max_lag (need more "
        "than 3*max_lag states after burn-in and thinning)");
  }

  std::vector<std::string> warnings;
  const Dataset data = materialize(spec.dataset, &warnings);

  const std::size_t n_chains = spec.chains.size();
  const std::size_t n_seeds = spec.replicate_seeds.size();
  const std::size_t n_cells = n_chains * n_seeds;

  // Cells are independent (each owns its RNG stream), so they run on a small
  // worker pool; all files are written afterwards by this thread alone, in a
  // fixed order, which keeps outputs byte-stable.
  std::vector<CellResult> cells(n_cells);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < n_cells;
         i = next.fetch_add(1)) {
      const ChainKind kind = spec.chains[i / n_seeds];
      const std::uint64_t seed = spec.replicate_seeds[i % n_seeds];
      cells[i] = run_cell(kind, seed, data, spec);
    }
  };
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const std::size_t n_workers = std::min<std::size_t>(n_cells, hw);
  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_workers; ++t) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
  }

  ExperimentResult result;
  result.cells = cells;

  const std::filesystem::path dir(spec.output_dir);
  std::filesystem::create_directories(dir);

  // Per-cell ACF series.
  for (std::size_t i = 0; i < n_cells; ++i) {
    const CellResult& cell = cells[i];
    if (!cell.ok) continue;
    std::string body = "lag,acf\n";
    for (int k = 1; k <= spec.max_lag; ++k) {
      body += std::to_string(k);
      body += ',';
      body += fmt4(cell.acf[static_cast<std::size_t>(k - 1)]);
      body += '\n';
    }
    const std::string name = "acf_" + chain_kind_name(cell.kind) + "_" +
                             std::to_string(cell.seed) + ".csv";
    write_text_file((dir / name).string(), body);
    result.files_written.push_back((dir / name).string());
  }

  // Across-seed median table, one row per requested chain.
  result.table.assign(n_chains, std::vector<double>(
                                    static_cast<std::size_t>(spec.max_lag),
                                    std::numeric_limits<double>::quiet_NaN()));
  std::string table = "chain";
  for (int k = 1; k <= spec.max_lag; ++k) table += ",lag_" + std::to_string(k);
  table += '\n';
  for (std::size_t c = 0; c < n_chains; ++c) {
    table += chain_kind_name(spec.chains[c]);
    for (int k = 1; k <= spec.max_lag; ++k) {
      std::vector<double> vals;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const CellResult& cell = cells[c * n_seeds + s];
        if (cell.ok) vals.push_back(cell.acf[static_cast<std::size_t>(k - 1)]);
      }
      const double med = median(std::move(vals));
      result.table[c][static_cast<std::size_t>(k - 1)] = med;
      table += ',';
      table += fmt4(med);
    }
    table += '\n';
  }
  write_text_file((dir / "table.csv").string(), table);
  result.files_written.push_back((dir / "table.csv").string());

  // Structured summary.
  json summary;
  summary["schema_version"] = 1;
  summary["spec"] = spec_to_json(spec, resolved_burn);
  summary["warnings"] = warnings;
  json jcells = json::array();
  for (const CellResult& cell : cells) {
    json jc;
    jc["chain"] = chain_kind_name(cell.kind);
    jc["seed"] = cell.seed;
    jc["ok"] = cell.ok;
    jc["wall_seconds"] = cell.wall_seconds;
    if (cell.ok) {
      jc["acf"] = cell.acf;
      jc["ess"] = cell.ess;
      jc["pxda_acceptance"] =
          cell.pxda_acceptance ? json(*cell.pxda_acceptance) : json(nullptr);
    } else {
      jc["error"] = cell.error;
    }
    jcells.push_back(jc);
  }
  summary["cells"] = jcells;
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  result.files_written.push_back((dir / "summary.json").string());

  return result;
}

SpectralProbeResult run_spectral_probe(const std::vector<double>& a_values,
                                       const Dataset& instance,
                                       const Hyperparams& hp_rest,
                                       const std::string& output_dir,
                                       const TraceProbeOptions& opt,
                                       double small_beta_sigma2) {
  if (a_values.empty())
    throw ConfigError("run_spectral_probe: at least one shape value is required");
  for (const double a : a_values) {
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("run_spectral_probe: every shape value must satisfy a > 0");
  }
  if (instance.p() != 1)
    throw ConfigError("run_spectral_probe: the instance must have p = 1");

  SpectralProbeResult result;
  for (const double a : a_values) {
    SpectralProbeEntry entry;
    entry.a = a;
    try {
      entry.report = trace_probe(a, instance, hp_rest, opt);
      entry.small_beta_slope =
          small_beta_asymptotics_check(a, hp_rest, small_beta_sigma2);
      entry.ok = true;
    } catch (const std::exception& err) {
      entry.ok = false;
      entry.error = err.what();
    }
    result.entries.push_back(entry);
  }

  const std::filesystem::path dir(output_dir);
  std::filesystem::create_directories(dir);
  json report;
  report["schema_version"] = 1;
  report["hyper_rest"] = {{"b", hp_rest.b},
                          {"alpha", hp_rest.alpha},
                          {"xi", hp_rest.xi}};
  report["small_beta_sigma2"] = small_beta_sigma2;
  json entries = json::array();
  for (const SpectralProbeEntry& entry : result.entries) {
    json je;
    je["a"] = entry.a;
    je["ok"] = entry.ok;
    if (entry.ok) {
      je["verdict"] = trace_verdict_name(entry.report.verdict);
      je["cutoffs"] = entry.report.cutoffs;
      je["restricted_integrals"] = entry.report.restricted_integrals;
      je["slope"] = entry.report.slope;
      je["slope_std_err"] = entry.report.slope_std_err;
      je["tail_fraction"] = entry.report.tail_fraction;
      je["small_beta_slope"] = entry.small_beta_slope;
    } else {
      je["error"] = entry.error;
    }
    entries.push_back(je);
  }
  report["entries"] = entries;
  const std::string path = (dir / "spectral.json").string();
  write_text_file(path, report.dump(2) + "\n");
  result.file = path;
  return result;
}

}  // namespace ngmc
