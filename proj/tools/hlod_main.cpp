#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hlod/io.hpp"
#include "hlod/runner.hpp"

namespace {

void add_common_options(CLI::App* cmd, hlod::RunConfig& cfg,
                        std::string& manifest_path) {
  cmd->add_option("--scenario", cfg.scenario,
                  "example1 | example2 | example3");
  cmd->add_option("--seed", cfg.seed, "random field seed");
  cmd->add_option("--H-exp", cfg.H_exp, "coarse mesh: 2^H_exp cells per axis");
  cmd->add_option("--eta-exp", cfg.eta_exp,
                  "coefficient mesh: 2^eta_exp cells per axis");
  cmd->add_option("--h-exp", cfg.h_exp, "fine mesh: 2^h_exp cells per axis");
  cmd->add_option("--layers", cfg.layers, "patch oversampling layers");
  cmd->add_option("--method", cfg.method,
                  "fem | lod_adaptive | lod_frozen | lod_full | "
                  "fine_reference");
  cmd->add_option("--strategy", cfg.strategy,
                  "marking strategy: zeta | fixed");
  cmd->add_option("--zeta-tol", cfg.zeta_tol,
                  "relative marking factor in [0,1]");
  cmd->add_option("--fixed-tol", cfg.fixed_tol,
                  "fixed marking tolerance (inf freezes correctors)");
  cmd->add_option("--max-iters", cfg.max_iters, "iteration cap");
  cmd->add_option("--residual-tol", cfg.residual_tol,
                  "relative residual stopping threshold");
  cmd->add_option("--ref-max-iters", cfg.ref_max_iters,
                  "iteration cap for the fine reference");
  cmd->add_option("--k", cfg.k_override, "wave number override (0 = default)");
  cmd->add_option("--eps-scale", cfg.eps_scale,
                  "scales the Kerr coefficient (0 = linear problem)");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--reference-cache", cfg.reference_cache,
                  "directory for cached fine references");
  cmd->add_option("--corrector-cache", cfg.corrector_cache,
                  "directory for cached element correctors");
  cmd->add_option("--raster-eps", cfg.raster_eps,
                  "raster file overriding the Kerr pattern");
  cmd->add_option("--raster-n", cfg.raster_n,
                  "raster file overriding the refractive-index pattern");
  cmd->add_flag("--dump-iterates", cfg.dump_iterates,
                "write every prolongated iterate");
  cmd->add_option("--workers", cfg.workers,
                  "corrector worker threads (0 = HLOD_WORKERS env or "
                  "hardware)");
  cmd->add_option("--manifest", manifest_path,
                  "re-run from a manifest.json (overrides all other flags)");
  // --config is applied before parsing (explicit flags win); registered here
  // so CLI11 accepts and documents it
  static std::string config_sink;
  cmd->add_option("--config", config_sink,
                  "key=value config file (explicit flags override it)");
}

// The config file is applied to the defaults before CLI11 parses the
// command line, so explicitly passed flags take precedence.
std::string find_config_argument(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

hlod::RunConfig resolve_config(const hlod::RunConfig& flags,
                               const std::string& manifest_path) {
  if (manifest_path.empty()) return flags;
  std::ifstream in(manifest_path);
  if (!in) throw hlod::IoError("cannot open manifest " + manifest_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return hlod::from_manifest_json(ss.str());
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf")
      out.push_back(std::numeric_limits<double>::infinity());
    else
      out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hlod: adaptive multiscale solver for the heterogeneous nonlinear "
      "Helmholtz equation"};
  app.require_subcommand(1);

  hlod::RunConfig cfg;
  std::string manifest_path;
  std::string h_exps_csv = "2,3,4,5";
  std::string methods_csv = "lod_adaptive,fem";
  std::string tols_csv = "1,0.5,0.25,0.125,0";

  CLI::App* run = app.add_subcommand("run", "execute a single configured run");
  add_common_options(run, cfg, manifest_path);

  CLI::App* study = app.add_subcommand(
      "study", "convergence study over coarse mesh sizes and methods");
  add_common_options(study, cfg, manifest_path);
  study->add_option("--H-exps", h_exps_csv, "comma-separated H exponents");
  study->add_option("--methods", methods_csv, "comma-separated methods");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "error-vs-iteration curves for a list of fixed tolerances");
  add_common_options(sweep, cfg, manifest_path);
  sweep->add_option("--tols", tols_csv,
                    "comma-separated fixed tolerances ('inf' allowed)");

  CLI::App* print_config = app.add_subcommand(
      "print-config", "validate and print the resolved configuration");
  add_common_options(print_config, cfg, manifest_path);

  try {
    const std::string config_path = find_config_argument(argc, argv);
    if (!config_path.empty()) cfg = hlod::apply_config_file(cfg, config_path);
  } catch (const hlod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hlod::kExitConfigError;
  } catch (const hlod::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return hlod::kExitIoError;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hlod::kExitConfigError;
  }

  try {
    const hlod::RunConfig resolved = resolve_config(cfg, manifest_path);
    if (print_config->parsed()) {
      hlod::validate(resolved);
      std::cout << hlod::to_manifest_json(resolved);
      return hlod::kExitOk;
    }
    if (run->parsed()) {
      const auto artifacts = hlod::run_single(resolved);
      std::cout << "wrote " << artifacts.out_dir.string() << " ("
                << artifacts.iterations << " iterations, "
                << (artifacts.converged ? "converged" : "not converged")
                << ")\n";
      return artifacts.converged ? hlod::kExitOk : hlod::kExitNonConvergence;
    }
    if (study->parsed()) {
      hlod::run_convergence_study(resolved, parse_int_list(h_exps_csv),
                                  parse_string_list(methods_csv));
      std::cout << "wrote "
                << (std::filesystem::path(resolved.out_dir) / "study.csv")
                       .string()
                << "\n";
      return hlod::kExitOk;
    }
    if (sweep->parsed()) {
      hlod::run_tolerance_sweep(resolved, parse_double_list(tols_csv));
      std::cout << "wrote "
                << (std::filesystem::path(resolved.out_dir) / "sweep.csv")
                       .string()
                << "\n";
      return hlod::kExitOk;
    }
  } catch (const hlod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hlod::kExitConfigError;
  } catch (const hlod::NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return hlod::kExitNonConvergence;
  } catch (const hlod::SingularSystemError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return hlod::kExitNonConvergence;
  } catch (const hlod::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return hlod::kExitIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hlod::kExitConfigError;
  }
  return hlod::kExitOk;
}
