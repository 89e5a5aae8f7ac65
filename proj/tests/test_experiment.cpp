#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "ngmc/csv.hpp"
#include "ngmc/errors.hpp"
#include "ngmc/experiment.hpp"

using namespace ngmc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("ngmc_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& body) {
  std::vector<std::string> lines;
  std::string cur;
  for (const char ch : body) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

// A fast spec all the experiment cases share.
ExperimentSpec small_spec(const fs::path& dir) {
  ExperimentSpec spec;
  spec.dataset.kind = DatasetSource::Kind::kSimulate;
  spec.dataset.n = 6;
  spec.dataset.p = 4;
  spec.dataset.seed = 7;
  spec.hyper = Hyperparams(0.75, 2.0, 0.5, 1.0);
  spec.chains = {ChainKind::kThreeBlock, ChainKind::kTwoBlock,
                 ChainKind::kHaarPxDa};
  spec.iterations = 4000;
  spec.burn_in = 400;
  spec.thin = 1;
  spec.max_lag = 5;
  spec.replicate_seeds = {1, 2, 3};
  spec.output_dir = dir.string();
  return spec;
}

}  // namespace

TEST_CASE("simulated datasets have the requested shape and are seed-stable") {
  const Dataset d1 = simulate_dataset(10, 15, 1);
  CHECK(d1.n() == 10);
  CHECK(d1.p() == 15);
  CHECK(d1.Y.size() == 10);

  const Dataset d2 = simulate_dataset(15, 10, 2);
  CHECK(d2.n() == 15);
  CHECK(d2.p() == 10);

  const Dataset again = simulate_dataset(10, 15, 1);
  CHECK(d1.X == again.X);
  CHECK(d1.Y == again.Y);

  const Dataset other = simulate_dataset(10, 15, 3);
  CHECK(d1.X != other.X);

  // Standard-normal entries: loose moment bounds on 150 + 10 draws.
  const double mean = d1.X.mean();
  const double var = (d1.X.array() - mean).square().mean();
  CHECK(std::abs(mean) < 0.5);
  CHECK(var > 0.4);
  CHECK(var < 2.0);

  CHECK_THROWS_AS(simulate_dataset(0, 3, 1), ConfigError);
  CHECK_THROWS_AS(simulate_dataset(3, 0, 1), ConfigError);
}

TEST_CASE("csv loading parses clean files and reports located errors") {
  const fs::path dir = fresh_dir("csv");

  SUBCASE("identity design round-trips") {
    write_file(dir / "x.csv", "1,0\n0,1\n");
    write_file(dir / "y.csv", "1\n2\n");
    const Dataset d = load_csv((dir / "x.csv").string(),
                               (dir / "y.csv").string());
    CHECK(d.X == Eigen::MatrixXd::Identity(2, 2));
    CHECK(d.Y(0) == 1.0);
    CHECK(d.Y(1) == 2.0);
  }

  SUBCASE("a header row without the flag fails at row 1") {
    write_file(dir / "xh.csv", "v1,v2\n1,0\n0,1\n");
    write_file(dir / "yh.csv", "resp\n1\n2\n");
    try {
      load_csv((dir / "xh.csv").string(), (dir / "yh.csv").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      const std::string what = err.what();
      CHECK(what.find("row 1") != std::string::npos);
    }
    // The same files parse once the header flag is set.
    const Dataset d = load_csv((dir / "xh.csv").string(),
                               (dir / "yh.csv").string(), true);
    CHECK(d.X == Eigen::MatrixXd::Identity(2, 2));
  }

  SUBCASE("ragged and non-numeric cells carry row and column locations") {
    write_file(dir / "ragged.csv", "1,2,3\n4,5\n");
    write_file(dir / "y3.csv", "1\n2\n");
    try {
      read_csv_matrix((dir / "ragged.csv").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      const std::string what = err.what();
      CHECK(what.find("row 2") != std::string::npos);
      CHECK(what.find("expected 3") != std::string::npos);
    }

    write_file(dir / "bad.csv", "1,2\n3,oops\n");
    try {
      read_csv_matrix((dir / "bad.csv").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      const std::string what = err.what();
      CHECK(what.find("row 2") != std::string::npos);
      CHECK(what.find("column 2") != std::string::npos);
    }
  }

  SUBCASE("dimension mismatch and wide responses are rejected") {
    write_file(dir / "x2.csv", "1,0\n0,1\n");
    write_file(dir / "y1.csv", "1\n");
    CHECK_THROWS_AS(
        load_csv((dir / "x2.csv").string(), (dir / "y1.csv").string()),
        ConfigError);

    write_file(dir / "ywide.csv", "1,2\n3,4\n");
    CHECK_THROWS_AS(
        load_csv((dir / "x2.csv").string(), (dir / "ywide.csv").string()),
        ConfigError);

    CHECK_THROWS_AS(
        load_csv((dir / "missing.csv").string(), (dir / "y1.csv").string()),
        ConfigError);
  }

  SUBCASE("an all-binary design earns a warning, not an error") {
    write_file(dir / "xb.csv", "1,0,1\n0,1,1\n1,1,0\n");
    write_file(dir / "yb.csv", "0.5\n-0.25\n1.5\n");
    std::vector<std::string> warnings;
    const Dataset d = load_csv((dir / "xb.csv").string(),
                               (dir / "yb.csv").string(), false, &warnings);
    CHECK(d.n() == 3);
    CHECK(d.p() == 3);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("binary") != std::string::npos);

    warnings.clear();
    write_file(dir / "xr.csv", "1,0.5\n0,1\n");
    write_file(dir / "yr.csv", "1\n2\n");
    load_csv((dir / "xr.csv").string(), (dir / "yr.csv").string(), false,
             &warnings);
    CHECK(warnings.empty());
  }

  SUBCASE("CRLF endings and a trailing newline are tolerated") {
    write_file(dir / "xw.csv", "1,0\r\n0,1\r\n");
    write_file(dir / "yw.csv", "1\n2");
    const Dataset d = load_csv((dir / "xw.csv").string(),
                               (dir / "yw.csv").string());
    CHECK(d.X == Eigen::MatrixXd::Identity(2, 2));
  }

  SUBCASE("matrices round-trip through the writer") {
    Eigen::MatrixXd m(2, 3);
    m << 1.5, -2.25, 3.0,
         0.125, 1e-7, -4.0;
    write_csv_matrix((dir / "rt.csv").string(), m);
    const Eigen::MatrixXd back = read_csv_matrix((dir / "rt.csv").string());
    CHECK(back == m);
  }
}

TEST_CASE("the experiment harness emits the full file set with sane contents") {
  const fs::path dir = fresh_dir("exp");
  const ExperimentSpec spec = small_spec(dir);
  const ExperimentResult res = run_experiment(spec);

  REQUIRE(res.cells.size() == 9);
  for (const CellResult& cell : res.cells) {
    CAPTURE(chain_kind_name(cell.kind));
    CAPTURE(cell.seed);
    REQUIRE(cell.ok);
    REQUIRE(cell.acf.size() == 5);
    for (const double r : cell.acf) {
      CHECK(r >= -1.0);
      CHECK(r <= 1.0);
    }
    CHECK(cell.ess > 0.0);
    CHECK(cell.pxda_acceptance.has_value() ==
          (cell.kind == ChainKind::kHaarPxDa));
    if (cell.pxda_acceptance) {
      CHECK(*cell.pxda_acceptance > 0.0);
      CHECK(*cell.pxda_acceptance <= 1.0);
    }
  }

  // Cells come back chain-major in spec order, seed-minor in list order.
  CHECK(res.cells[0].kind == ChainKind::kThreeBlock);
  CHECK(res.cells[0].seed == 1);
  CHECK(res.cells[5].kind == ChainKind::kTwoBlock);
  CHECK(res.cells[5].seed == 3);
  CHECK(res.cells[8].kind == ChainKind::kHaarPxDa);
  CHECK(res.cells[8].seed == 3);

  // One ACF file per cell.
  for (const std::string chain : {"three_block", "two_block", "haar_pxda"}) {
    for (int seed = 1; seed <= 3; ++seed) {
      const fs::path f =
          dir / ("acf_" + chain + "_" + std::to_string(seed) + ".csv");
      CAPTURE(f.string());
      REQUIRE(fs::exists(f));
      const std::vector<std::string> lines = split_lines(slurp(f));
      REQUIRE(lines.size() == 6);
      CHECK(lines[0] == "lag,acf");
      for (int k = 1; k <= 5; ++k) {
        const std::vector<std::string> fields = split_fields(lines[k]);
        REQUIRE(fields.size() == 2);
        CHECK(fields[0] == std::to_string(k));
        const double v = std::stod(fields[1]);
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      }
    }
  }

  // table.csv: header plus one row per chain, max_lag value columns.
  const std::vector<std::string> tlines = split_lines(slurp(dir / "table.csv"));
  REQUIRE(tlines.size() == 4);
  CHECK(tlines[0] == "chain,lag_1,lag_2,lag_3,lag_4,lag_5");
  const std::vector<std::string> row_names = {"three_block", "two_block",
                                              "haar_pxda"};
  for (std::size_t r = 0; r < 3; ++r) {
    const std::vector<std::string> fields = split_fields(tlines[r + 1]);
    REQUIRE(fields.size() == 6);
    CHECK(fields[0] == row_names[r]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const double v = std::stod(fields[k]);
      CHECK(v == doctest::Approx(res.table[r][k - 1]).epsilon(1e-3));
    }
  }

  // summary.json: versioned schema, one entry per cell.
  const json summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("schema_version") == 1);
  CHECK(summary.at("spec").at("burn_in") == 400);
  CHECK(summary.at("spec").at("max_lag") == 5);
  REQUIRE(summary.at("cells").size() == 9);
  for (const json& jc : summary.at("cells")) {
    CHECK(jc.at("ok") == true);
    CHECK(jc.at("acf").size() == 5);
    CHECK(jc.at("ess").get<double>() > 0.0);
    CHECK(jc.at("wall_seconds").get<double>() >= 0.0);
    if (jc.at("chain") == "haar_pxda") {
      CHECK(jc.at("pxda_acceptance").is_number());
    } else {
      CHECK(jc.at("pxda_acceptance").is_null());
    }
  }
}

TEST_CASE("experiment outputs are byte-identical across reruns") {
  const fs::path dir_a = fresh_dir("det_a");
  const fs::path dir_b = fresh_dir("det_b");
  ExperimentSpec spec = small_spec(dir_a);
  spec.chains = {ChainKind::kThreeBlock, ChainKind::kHaarPxDa};
  spec.iterations = 2000;
  spec.burn_in = 200;
  spec.replicate_seeds = {11, 12};
  run_experiment(spec);
  spec.output_dir = dir_b.string();
  run_experiment(spec);

  for (const std::string name :
       {"acf_three_block_11.csv", "acf_three_block_12.csv",
        "acf_haar_pxda_11.csv", "acf_haar_pxda_12.csv", "table.csv"}) {
    CAPTURE(name);
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }

  // summary.json matches once the wall-clock fields are nulled.
  json sa = json::parse(slurp(dir_a / "summary.json"));
  json sb = json::parse(slurp(dir_b / "summary.json"));
  for (json* s : {&sa, &sb}) {
    for (json& jc : s->at("cells")) jc["wall_seconds"] = 0.0;
  }
  CHECK(sa.dump() == sb.dump());
}

TEST_CASE("the experiment harness validates its spec and isolates cell failures") {
  const fs::path dir = fresh_dir("val");

  ExperimentSpec spec = small_spec(dir);
  spec.chains = {};
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);

  spec = small_spec(dir);
  spec.max_lag = 0;
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);

  spec = small_spec(dir);
  spec.replicate_seeds = {};
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);

  spec = small_spec(dir);
  spec.iterations = 50;  // keeps only 45 states, too short for max_lag 5 * 3
  spec.burn_in = 5;
  spec.max_lag = 20;
  CHECK_THROWS_AS(run_experiment(spec), ConfigError);

  // xi = 0 forbids the sandwich chain; its cells fail, the rest proceed.
  spec = small_spec(fresh_dir("valcells"));
  spec.hyper = Hyperparams(0.75, 2.0, 0.5, 0.0);
  spec.chains = {ChainKind::kThreeBlock, ChainKind::kHaarPxDa};
  spec.replicate_seeds = {1, 2};
  const ExperimentResult res = run_experiment(spec);
  REQUIRE(res.cells.size() == 4);
  CHECK(res.cells[0].ok);
  CHECK(res.cells[1].ok);
  CHECK_FALSE(res.cells[2].ok);
  CHECK_FALSE(res.cells[3].ok);
  CHECK(res.cells[2].error.find("xi") != std::string::npos);

  // The failed row is all-nan in the table; the summary records the error.
  const json summary = json::parse(slurp(fs::path(spec.output_dir) / "summary.json"));
  int failed = 0;
  for (const json& jc : summary.at("cells")) {
    if (!jc.at("ok").get<bool>()) {
      ++failed;
      CHECK(jc.contains("error"));
    }
  }
  CHECK(failed == 2);
  const std::vector<std::string> tlines =
      split_lines(slurp(fs::path(spec.output_dir) / "table.csv"));
  REQUIRE(tlines.size() == 3);
  const std::vector<std::string> bad_row = split_fields(tlines[2]);
  CHECK(bad_row[0] == "haar_pxda");
  for (std::size_t k = 1; k < bad_row.size(); ++k) CHECK(bad_row[k] == "nan");
}

TEST_CASE("the spectral probe run writes a per-shape report and validates input") {
  const fs::path dir = fresh_dir("spectral");
  const Dataset unit(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1));
  const Hyperparams rest(0.75, 1.0, 1.0, 1.0);

  TraceProbeOptions opt;
  opt.cutoffs = {1e-2, 1e-3, 1e-4, 1e-5};  // short grid keeps the case fast

  const SpectralProbeResult res =
      run_spectral_probe({0.75}, unit, rest, dir.string(), opt);
  REQUIRE(res.entries.size() == 1);
  if (!res.entries[0].ok) CAPTURE(res.entries[0].error);
  REQUIRE(res.entries[0].ok);
  CHECK(res.entries[0].report.restricted_integrals.size() == 4);
  CHECK(res.entries[0].report.restricted_integrals.front() > 0.0);
  CHECK(res.entries[0].small_beta_slope > -0.6);

  const json report = json::parse(slurp(dir / "spectral.json"));
  CHECK(report.at("schema_version") == 1);
  REQUIRE(report.at("entries").size() == 1);
  const json& je = report.at("entries")[0];
  CHECK(je.at("a") == 0.75);
  CHECK(je.at("ok") == true);
  CHECK(je.at("verdict").is_string());
  CHECK(je.at("restricted_integrals").size() == 4);
  CHECK(je.at("small_beta_slope").get<double>() > -0.6);

  CHECK_THROWS_AS(run_spectral_probe({}, unit, rest, dir.string(), opt),
                  ConfigError);
  CHECK_THROWS_AS(run_spectral_probe({0.0}, unit, rest, dir.string(), opt),
                  ConfigError);
  CHECK_THROWS_AS(run_spectral_probe({0.5, -1.0}, unit, rest, dir.string(), opt),
                  ConfigError);
  const Dataset wide(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Ones(2));
  CHECK_THROWS_AS(run_spectral_probe({0.75}, wide, rest, dir.string(), opt),
                  ConfigError);
}
