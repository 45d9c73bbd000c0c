#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hlod/io.hpp"
#include "hlod/runner.hpp"
#include "oracles.hpp"

using namespace hlod;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("hlod_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HLOD_CLI_PATH) + " " + args + " 2>/dev/null >/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

// strips the wall_seconds column (the only timing-dependent output)
std::string report_without_timing(const fs::path& p) {
  std::string out;
  for (const auto& row : read_csv(p)) {
    for (size_t i = 0; i + 1 < row.size(); ++i) out += row[i] + ",";
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("field dump round trip is lossless") {
  const auto dir = temp_dir("field");
  const int nodes = 9;
  const CVector v = oracle::random_complex(nodes * nodes, 5);
  write_field(dir / "f.txt", v, nodes);
  const CVector back = read_field(dir / "f.txt");
  REQUIRE(back.size() == v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(back[i] == v[i]);

  CHECK_THROWS_AS(read_field(dir / "missing.txt"), IoError);
}

TEST_CASE("raster round trip") {
  const auto dir = temp_dir("raster");
  Raster r;
  r.nx = 3;
  r.ny = 2;
  r.values = {0.0, 0.85, 0.0, 0.85, 0.0, 0.85};
  write_raster(dir / "r.txt", r);
  const Raster back = read_raster(dir / "r.txt");
  CHECK(back.nx == r.nx);
  CHECK(back.ny == r.ny);
  CHECK(back.values == r.values);
}

TEST_CASE("csv round trip is lossless") {
  const auto dir = temp_dir("csv");
  const std::vector<std::string> header = {"a", "b"};
  std::vector<std::vector<std::string>> rows;
  SplitMix64 rng(17);
  for (int i = 0; i < 20; ++i)
    rows.push_back({format_double(rng.uniform(-1e8, 1e8)),
                    format_double(rng.uniform(-1, 1) * 1e-14)});
  write_csv(dir / "t.csv", header, rows);
  const auto back = read_csv(dir / "t.csv");
  REQUIRE(back.size() == rows.size() + 1);
  CHECK(back[0] == header);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i + 1] == rows[i]);
    // parsed doubles are bit-identical
    CHECK(std::stod(back[i + 1][0]) == std::stod(rows[i][0]));
  }
}

TEST_CASE("manifest round trip and validation") {
  RunConfig cfg;
  cfg.scenario = "example3";
  cfg.seed = 99;
  cfg.H_exp = 3;
  cfg.eta_exp = 4;
  cfg.h_exp = 6;
  cfg.method = "lod_frozen";
  cfg.strategy = "fixed";
  cfg.fixed_tol = 0.25;
  cfg.eps_scale = 0.5;
  const std::string text = to_manifest_json(cfg);
  const RunConfig back = from_manifest_json(text);
  CHECK(to_manifest_json(back) == text);

  // an infinite fixed tolerance survives the round trip
  RunConfig frozen = cfg;
  frozen.fixed_tol = std::numeric_limits<double>::infinity();
  const RunConfig frozen_back =
      from_manifest_json(to_manifest_json(frozen));
  CHECK(std::isinf(frozen_back.fixed_tol));

  CHECK_THROWS_AS(from_manifest_json("{}"), ConfigError);
  CHECK_THROWS_AS(from_manifest_json("not json"), ConfigError);

  RunConfig bad = cfg;
  bad.eta_exp = 2;  // coarser than H
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.method = "spectral";
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.zeta_tol = 1.5;
  bad.strategy = "zeta";
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_THROWS_AS(scenario_by_name("example9", 1), ConfigError);
}

TEST_CASE("corrector cache stores and reloads bit-identically") {
  const auto dir = temp_dir("cache");
  const MeshHierarchy hier = build_hierarchy(2, 2, 4);
  const auto op = build_quasi_interpolation(hier);
  const int ne = hier.fine.num_elements();
  CoefficientField A, n, w;
  A.values = oracle::random_real(ne, 1, 0.5, 2.0);
  n.values = oracle::random_real(ne, 2, 0.5, 1.0);
  w.values = oracle::random_real(ne, 3, 0.0, 1.0);

  const ElementCorrector c =
      compute_element_corrector(hier, op, 5, 1, w, A, n, 3.0);
  const CorrectorCache cache(dir / "correctors");
  ElementCorrector loaded;
  CHECK(!cache.load(hier, 5, 1, w, loaded));
  cache.store(hier, c);
  REQUIRE(cache.load(hier, 5, 1, w, loaded));
  CHECK(loaded.fine_dofs == c.fine_dofs);
  CHECK((loaded.basis_corrections - c.basis_corrections).norm() == 0.0);
  CHECK(loaded.patch_fine_elements == c.patch_fine_elements);
  CHECK((loaded.weight_snapshot - c.weight_snapshot).norm() == 0.0);

  // a different weight misses
  CoefficientField w2 = w;
  w2.values[hier.fine.elem_id(2, 2)] += 0.5;
  CHECK(!cache.load(hier, 5, 1, w2, loaded));
}

TEST_CASE("run_single: linear fem run has exactly one iteration") {
  const auto dir = temp_dir("run_fem");
  RunConfig cfg;
  cfg.scenario = "example1";
  cfg.seed = 4;
  cfg.H_exp = 2;
  cfg.eta_exp = 3;
  cfg.h_exp = 4;
  cfg.layers = 1;
  cfg.method = "fem";
  cfg.k_override = 4.0;
  cfg.eps_scale = 0.0;
  cfg.max_iters = 10;
  cfg.workers = 1;
  cfg.out_dir = (dir / "out").string();
  const RunArtifacts artifacts = run_single(cfg);
  CHECK(artifacts.converged);
  CHECK(artifacts.iterations == 1);
  CHECK(fs::exists(artifacts.out_dir / "manifest.json"));
  CHECK(fs::exists(artifacts.out_dir / "iteration_report.csv"));
  CHECK(fs::exists(artifacts.out_dir / "field.txt"));
  CHECK(fs::exists(artifacts.out_dir / "indicator_trace.csv"));

  // updated fraction column starts at 1.0
  const auto rows = read_csv(artifacts.out_dir / "iteration_report.csv");
  REQUIRE(rows.size() >= 2);
  CHECK(std::stod(rows[1][3]) == 1.0);
}

TEST_CASE("a run is re-executable from its manifest alone") {
  const auto dir = temp_dir("rerun");
  RunConfig cfg;
  cfg.scenario = "example1";
  cfg.seed = 12;
  cfg.H_exp = 2;
  cfg.eta_exp = 3;
  cfg.h_exp = 4;
  cfg.layers = 1;
  cfg.method = "lod_adaptive";
  cfg.k_override = 5.0;
  cfg.max_iters = 4;
  cfg.residual_tol = 1e-300;
  cfg.workers = 2;
  cfg.out_dir = (dir / "first").string();
  run_single(cfg);

  RunConfig again =
      from_manifest_json(slurp(dir / "first" / "manifest.json"));
  again.out_dir = (dir / "second").string();
  run_single(again);

  CHECK(slurp(dir / "first" / "field.txt") ==
        slurp(dir / "second" / "field.txt"));
  CHECK(report_without_timing(dir / "first" / "iteration_report.csv") ==
        report_without_timing(dir / "second" / "iteration_report.csv"));
  CHECK(slurp(dir / "first" / "indicator_trace.csv") ==
        slurp(dir / "second" / "indicator_trace.csv"));
}

TEST_CASE("corrector cache does not change results") {
  const auto dir = temp_dir("run_cache");
  RunConfig cfg;
  cfg.scenario = "example1";
  cfg.seed = 12;
  cfg.H_exp = 2;
  cfg.eta_exp = 3;
  cfg.h_exp = 4;
  cfg.layers = 1;
  cfg.method = "lod_adaptive";
  cfg.k_override = 5.0;
  cfg.max_iters = 3;
  cfg.residual_tol = 1e-300;
  cfg.workers = 1;
  cfg.out_dir = (dir / "plain").string();
  run_single(cfg);

  cfg.corrector_cache = (dir / "ccache").string();
  cfg.out_dir = (dir / "cold").string();
  run_single(cfg);
  cfg.out_dir = (dir / "warm").string();  // now served from the cache
  run_single(cfg);

  const std::string plain = slurp(dir / "plain" / "field.txt");
  CHECK(slurp(dir / "cold" / "field.txt") == plain);
  CHECK(slurp(dir / "warm" / "field.txt") == plain);
}

TEST_CASE("study and sweep emit parseable tables") {
  const auto dir = temp_dir("study");
  RunConfig cfg;
  cfg.scenario = "example1";
  cfg.seed = 4;
  cfg.eta_exp = 3;
  cfg.h_exp = 4;
  cfg.layers = 1;
  cfg.k_override = 4.0;
  cfg.max_iters = 5;
  cfg.workers = 2;
  cfg.out_dir = (dir / "study").string();
  const auto artifacts = run_convergence_study(cfg, {1, 2}, {"lod_adaptive", "fem"});
  CHECK(artifacts.size() == 4);
  const auto rows = read_csv(dir / "study" / "study.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0][0] == "H");
  // EOC defined from the second H of each method
  CHECK(rows[1][6] == "nan");
  CHECK(rows[2][6] != "nan");

  cfg.out_dir = (dir / "sweep").string();
  cfg.H_exp = 2;
  const auto sweep = run_tolerance_sweep(cfg, {0.5, 0.0});
  CHECK(sweep.size() == 2);
  const auto srows = read_csv(dir / "sweep" / "sweep.csv");
  CHECK(srows[0][0] == "tol");
  CHECK(srows.size() >= 3);

  // both runs share one cached reference
  int refs = 0;
  for (const auto& entry :
       fs::directory_iterator(dir / "sweep" / "ref_cache"))
    refs += entry.is_regular_file();
  CHECK(refs == 1);
}

TEST_CASE("sweep semantics: frozen limit, shared first step, tol ordering") {
  const auto dir = temp_dir("sweep_sem");
  RunConfig base;
  base.scenario = "example1";
  base.seed = 9;
  base.H_exp = 2;
  base.eta_exp = 3;
  base.h_exp = 5;
  base.layers = 1;
  base.k_override = 5.0;
  base.max_iters = 5;
  base.residual_tol = 1e-300;
  base.workers = 2;
  base.out_dir = (dir / "sweep").string();
  const double inf = std::numeric_limits<double>::infinity();
  run_tolerance_sweep(base, {inf, 0.5, 0.05, 0.0});

  // organize rows by tolerance
  const auto rows = read_csv(dir / "sweep" / "sweep.csv");
  std::vector<std::vector<double>> curves(4);
  for (size_t i = 1; i < rows.size(); ++i) {
    const double tol = std::stod(rows[i][0]);
    const int idx = std::isinf(tol)   ? 0
                    : tol == 0.5      ? 1
                    : tol == 0.05     ? 2
                                      : 3;
    curves[idx].push_back(std::stod(rows[i][2]));
  }
  for (const auto& c : curves) REQUIRE(c.size() == 5);

  // a huge tolerance matches the frozen-corrector method column for column
  RunConfig frozen = base;
  frozen.method = "lod_frozen";
  frozen.out_dir = (dir / "frozen").string();
  frozen.reference_cache = (dir / "sweep" / "ref_cache").string();
  const RunArtifacts fr = run_single(frozen);
  REQUIRE(fr.report.entries.size() == 5);
  for (size_t m = 0; m < 5; ++m)
    CHECK(fr.report.entries[m].rel_energy_error == curves[0][m]);

  // every tolerance shares the identical first iteration
  for (int idx = 1; idx < 4; ++idx)
    CHECK(std::abs(curves[idx][0] - curves[0][0]) <= 1e-12);

  // decreasing tolerances do not worsen the best error (5% slack)
  auto min_of = [](const std::vector<double>& c) {
    return *std::min_element(c.begin(), c.end());
  };
  for (int idx = 1; idx < 4; ++idx)
    CHECK(min_of(curves[idx]) <= 1.05 * min_of(curves[idx - 1]));
}

TEST_CASE("study: full updates equal the adaptive zero-factor strategy") {
  const auto dir = temp_dir("study_eq");
  RunConfig cfg;
  cfg.scenario = "example1";
  cfg.seed = 4;
  cfg.eta_exp = 3;
  cfg.h_exp = 4;
  cfg.layers = 1;
  cfg.k_override = 4.0;
  cfg.strategy = "zeta";
  cfg.zeta_tol = 0.0;
  cfg.max_iters = 4;
  cfg.residual_tol = 1e-300;
  cfg.workers = 2;
  cfg.out_dir = (dir / "study").string();
  run_convergence_study(cfg, {1, 2}, {"lod_adaptive", "lod_full"});
  const auto rows = read_csv(dir / "study" / "study.csv");
  REQUIRE(rows.size() == 5);
  // min and final error columns agree exactly between the two methods
  CHECK(rows[1][2] == rows[3][2]);
  CHECK(rows[1][3] == rows[3][3]);
  CHECK(rows[2][2] == rows[4][2]);
  CHECK(rows[2][3] == rows[4][3]);
}

TEST_CASE("least squares eoc") {
  // err = C * H^2 exactly
  const std::vector<double> H = {0.5, 0.25, 0.125};
  const std::vector<double> err = {0.25, 0.0625, 0.015625};
  CHECK(least_squares_eoc(H, err) == doctest::Approx(2.0));
  CHECK_THROWS_AS(least_squares_eoc({1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("cli exit codes") {
  const auto dir = temp_dir("cli");

  // config error: eta finer than h
  CHECK(run_cli("run --scenario example1 --H-exp 2 --eta-exp 5 --h-exp 4") ==
        kExitConfigError);
  // config error: unknown scenario
  CHECK(run_cli("run --scenario example7") == kExitConfigError);
  // config error: unknown flag
  CHECK(run_cli("run --no-such-flag 3") == kExitConfigError);

  // successful tiny run
  const std::string ok_args =
      "run --scenario example1 --seed 4 --H-exp 2 --eta-exp 3 --h-exp 4 "
      "--layers 1 --k 4 --eps-scale 0 --method fem --max-iters 5 --workers 1 "
      "--out " +
      (dir / "ok").string();
  CHECK(run_cli(ok_args) == kExitOk);

  // non-convergence: nonlinear run capped at one iteration
  const std::string stuck_args =
      "run --scenario example1 --seed 4 --H-exp 2 --eta-exp 3 --h-exp 4 "
      "--layers 1 --k 5 --method lod_adaptive --max-iters 1 --workers 1 "
      "--ref-max-iters 40 --out " +
      (dir / "stuck").string();
  CHECK(run_cli(stuck_args) == kExitNonConvergence);

  // print-config emits a re-parseable manifest
  CHECK(run_cli("print-config --scenario example2") == kExitOk);

  // re-running from the written manifest succeeds
  CHECK(run_cli("run --manifest " + (dir / "ok" / "manifest.json").string()) ==
        kExitOk);
}

TEST_CASE("cli config file") {
  const auto dir = temp_dir("cli_cfg");
  std::ofstream cfg(dir / "run.cfg");
  cfg << "scenario=example1\n"
      << "seed=4\n"
      << "H-exp=2\n"
      << "eta-exp=3\n"
      << "h-exp=4\n"
      << "layers=1\n"
      << "k=4\n"
      << "eps-scale=0\n"
      << "method=fem\n"
      << "workers=1\n"
      << "out=" << (dir / "out").string() << "\n";
  cfg.close();
  CHECK(run_cli("run --config " + (dir / "run.cfg").string()) == kExitOk);
  CHECK(fs::exists(dir / "out" / "field.txt"));

  // malformed config line
  std::ofstream bad(dir / "bad.cfg");
  bad << "method fem\n";
  bad.close();
  CHECK(run_cli("run --config " + (dir / "bad.cfg").string()) ==
        kExitConfigError);
}
