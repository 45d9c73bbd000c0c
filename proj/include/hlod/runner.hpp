#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hlod/problems.hpp"
#include "hlod/solver.hpp"

namespace hlod {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum ExitCode {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitNonConvergence = 3,
  kExitIoError = 4,
};

/// Everything a run needs; serialized verbatim into the run manifest, so a
/// run is re-executable bit-identically from its manifest alone.
struct RunConfig {
  std::string scenario = "example1";
  uint64_t seed = 3;
  int H_exp = 3;
  int eta_exp = 5;
  int h_exp = 7;
  int layers = 2;
  // fem | lod_adaptive | lod_frozen | lod_full | fine_reference
  std::string method = "lod_adaptive";
  std::string strategy = "zeta";  // zeta | fixed
  double zeta_tol = 0.5;
  double fixed_tol = 0.0;
  int max_iters = 20;
  double residual_tol = 1e-12;
  int ref_max_iters = 60;
  double k_override = 0.0;  // 0 = scenario default
  double eps_scale = 1.0;
  std::string out_dir = "out";
  std::string reference_cache;  // optional directory
  std::string corrector_cache;  // optional directory
  std::string raster_eps;       // optional pattern override files
  std::string raster_n;
  bool dump_iterates = false;
  int workers = 0;  // 0 = HLOD_WORKERS env or hardware concurrency
};

std::string to_manifest_json(const RunConfig& cfg);
RunConfig from_manifest_json(const std::string& json_text);

/// Applies a key=value config file (keys are the CLI long option names,
/// '#' starts a comment) over a base config. Errors carry file:line.
RunConfig apply_config_file(RunConfig base, const std::string& path);

/// Throws ConfigError on invalid settings; warns on stderr when the coarse
/// resolution condition kH <= 1 is clearly violated.
void validate(const RunConfig& cfg);

Scenario scenario_by_name(const std::string& name, uint64_t seed);

/// Builds the problem for a config (scenario + overrides, materialized on
/// the configured hierarchy).
Problem build_problem(const RunConfig& cfg);

struct RunArtifacts {
  std::filesystem::path out_dir;
  bool converged = false;
  int iterations = 0;
  double min_rel_error = 0.0;    // min over iterations (NaN without reference)
  double final_rel_error = 0.0;  // last iterate (NaN without reference)
  double max_update_fraction_after_first = 0.0;
  IterationReport report;
};

/// Executes one configured run and writes manifest.json,
/// iteration_report.csv, field.txt, and (for lod methods)
/// indicator_trace.csv into the output directory.
RunArtifacts run_single(const RunConfig& cfg);

/// One fine reference per scenario, then every (H, method) combination;
/// writes study.csv with per-H errors and empirical orders of convergence.
std::vector<RunArtifacts> run_convergence_study(
    const RunConfig& base, const std::vector<int>& H_exps,
    const std::vector<std::string>& methods);

/// Fixed mesh, varying fixed tolerance; writes sweep.csv with one row per
/// (tolerance, iteration).
std::vector<RunArtifacts> run_tolerance_sweep(const RunConfig& base,
                                              const std::vector<double>& tols);

/// Least-squares slope of log(err) against log(H).
double least_squares_eoc(const std::vector<double>& H,
                         const std::vector<double>& err);

}  // namespace hlod
