#include "hlod/runner.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>

#include <json.hpp>

#include "hlod/io.hpp"
#include "hlod/parallel.hpp"

namespace hlod {

namespace {

using nlohmann::json;

json config_to_json(const RunConfig& c) {
  json j;
  j["format"] = "hlod-run-manifest-1";
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["H_exp"] = c.H_exp;
  j["eta_exp"] = c.eta_exp;
  j["h_exp"] = c.h_exp;
  j["layers"] = c.layers;
  j["method"] = c.method;
  j["strategy"] = c.strategy;
  j["zeta_tol"] = c.zeta_tol;
  // JSON has no infinity; an infinite fixed tolerance is a legitimate
  // setting (it freezes the correctors)
  if (std::isinf(c.fixed_tol))
    j["fixed_tol"] = "inf";
  else
    j["fixed_tol"] = c.fixed_tol;
  j["max_iters"] = c.max_iters;
  j["residual_tol"] = c.residual_tol;
  j["ref_max_iters"] = c.ref_max_iters;
  j["k_override"] = c.k_override;
  j["eps_scale"] = c.eps_scale;
  j["out_dir"] = c.out_dir;
  j["reference_cache"] = c.reference_cache;
  j["corrector_cache"] = c.corrector_cache;
  j["raster_eps"] = c.raster_eps;
  j["raster_n"] = c.raster_n;
  j["dump_iterates"] = c.dump_iterates;
  j["workers"] = c.workers;
  return j;
}

}  // namespace

std::string to_manifest_json(const RunConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

RunConfig from_manifest_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest parse error: ") + e.what());
  }
  if (j.value("format", "") != "hlod-run-manifest-1")
    throw ConfigError("manifest: unknown or missing format tag");
  RunConfig c;
  try {
    c.scenario = j.at("scenario").get<std::string>();
    c.seed = j.at("seed").get<uint64_t>();
    c.H_exp = j.at("H_exp").get<int>();
    c.eta_exp = j.at("eta_exp").get<int>();
    c.h_exp = j.at("h_exp").get<int>();
    c.layers = j.at("layers").get<int>();
    c.method = j.at("method").get<std::string>();
    c.strategy = j.at("strategy").get<std::string>();
    c.zeta_tol = j.at("zeta_tol").get<double>();
    if (j.at("fixed_tol").is_string())
      c.fixed_tol = std::numeric_limits<double>::infinity();
    else
      c.fixed_tol = j.at("fixed_tol").get<double>();
    c.max_iters = j.at("max_iters").get<int>();
    c.residual_tol = j.at("residual_tol").get<double>();
    c.ref_max_iters = j.at("ref_max_iters").get<int>();
    c.k_override = j.at("k_override").get<double>();
    c.eps_scale = j.at("eps_scale").get<double>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.reference_cache = j.at("reference_cache").get<std::string>();
    c.corrector_cache = j.at("corrector_cache").get<std::string>();
    c.raster_eps = j.at("raster_eps").get<std::string>();
    c.raster_n = j.at("raster_n").get<std::string>();
    c.dump_iterates = j.at("dump_iterates").get<bool>();
    c.workers = j.at("workers").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest field error: ") + e.what());
  }
  return c;
}

Scenario scenario_by_name(const std::string& name, uint64_t seed) {
  if (name == "example1") return example1(seed);
  if (name == "example2") return example2(seed);
  if (name == "example3") return example3();
  throw ConfigError("unknown scenario '" + name +
                    "' (expected example1, example2, or example3)");
}

RunConfig apply_config_file(RunConfig base, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto err = [&](const std::string& msg) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) err("expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) err("empty key");

    try {
      if (key == "scenario") base.scenario = value;
      else if (key == "seed") base.seed = std::stoull(value);
      else if (key == "H-exp") base.H_exp = std::stoi(value);
      else if (key == "eta-exp") base.eta_exp = std::stoi(value);
      else if (key == "h-exp") base.h_exp = std::stoi(value);
      else if (key == "layers") base.layers = std::stoi(value);
      else if (key == "method") base.method = value;
      else if (key == "strategy") base.strategy = value;
      else if (key == "zeta-tol") base.zeta_tol = std::stod(value);
      else if (key == "fixed-tol") base.fixed_tol = std::stod(value);
      else if (key == "max-iters") base.max_iters = std::stoi(value);
      else if (key == "residual-tol") base.residual_tol = std::stod(value);
      else if (key == "ref-max-iters") base.ref_max_iters = std::stoi(value);
      else if (key == "k") base.k_override = std::stod(value);
      else if (key == "eps-scale") base.eps_scale = std::stod(value);
      else if (key == "out") base.out_dir = value;
      else if (key == "reference-cache") base.reference_cache = value;
      else if (key == "corrector-cache") base.corrector_cache = value;
      else if (key == "raster-eps") base.raster_eps = value;
      else if (key == "raster-n") base.raster_n = value;
      else if (key == "dump-iterates")
        base.dump_iterates = (value == "1" || value == "true");
      else if (key == "workers") base.workers = std::stoi(value);
      else err("unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      err("invalid value '" + value + "' for key '" + key + "'");
    }
  }
  return base;
}

void validate(const RunConfig& cfg) {
  if (cfg.H_exp < 1 || cfg.eta_exp < cfg.H_exp || cfg.h_exp < cfg.eta_exp)
    throw ConfigError(
        "hierarchy exponents must satisfy 1 <= H_exp <= eta_exp <= h_exp");
  if (cfg.layers < 1) throw ConfigError("layers must be >= 1");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (cfg.residual_tol <= 0) throw ConfigError("residual_tol must be > 0");
  if (cfg.method != "fem" && cfg.method != "lod_adaptive" &&
      cfg.method != "lod_frozen" && cfg.method != "lod_full" &&
      cfg.method != "fine_reference")
    throw ConfigError("unknown method '" + cfg.method + "'");
  if (cfg.strategy != "zeta" && cfg.strategy != "fixed")
    throw ConfigError("unknown strategy '" + cfg.strategy + "'");
  if (cfg.strategy == "zeta" && (cfg.zeta_tol < 0 || cfg.zeta_tol > 1))
    throw ConfigError("zeta_tol must lie in [0,1]");
  if (cfg.eps_scale < 0) throw ConfigError("eps_scale must be >= 0");
  const Scenario s = scenario_by_name(cfg.scenario, cfg.seed);
  const double k = cfg.k_override > 0 ? cfg.k_override : s.k;
  const double H = std::pow(0.5, cfg.H_exp);
  if (k * H > 1.0)
    std::cerr << "warning: kH = " << k * H
              << " > 1; the coarse resolution condition is violated and the "
                 "coarse system may be ill-conditioned\n";
}

Problem build_problem(const RunConfig& cfg) {
  Scenario s = scenario_by_name(cfg.scenario, cfg.seed);
  if (cfg.k_override > 0) s.k = cfg.k_override;
  if (!cfg.raster_eps.empty()) {
    if (s.eps.kind != CoeffSpec::Kind::Raster)
      throw ConfigError("scenario " + cfg.scenario +
                        " does not take an eps raster override");
    s.eps.raster = read_raster(cfg.raster_eps);
  }
  if (!cfg.raster_n.empty()) {
    if (s.n.kind != CoeffSpec::Kind::Raster)
      throw ConfigError("scenario " + cfg.scenario +
                        " does not take an n raster override");
    s.n.raster = read_raster(cfg.raster_n);
  }
  const MeshHierarchy hier =
      build_hierarchy(cfg.H_exp, cfg.eta_exp, cfg.h_exp);
  return materialize(s, hier, cfg.eps_scale);
}

namespace {

IterationConfig iteration_config(const RunConfig& cfg) {
  IterationConfig it;
  it.max_iters = cfg.max_iters;
  it.residual_tol = cfg.residual_tol;
  it.layers = cfg.layers;
  it.strategy =
      cfg.strategy == "fixed" ? MarkStrategy::FixedTol : MarkStrategy::ZetaTol;
  it.mark_param = cfg.strategy == "fixed" ? cfg.fixed_tol : cfg.zeta_tol;
  it.workers = cfg.workers > 0 ? cfg.workers : default_workers();
  return it;
}

LodMode mode_of(const std::string& method) {
  if (method == "fem") return LodMode::Fem;
  if (method == "lod_frozen") return LodMode::Frozen;
  if (method == "lod_full") return LodMode::Full;
  return LodMode::Adaptive;
}

// the reference protocol: iterate the fine problem to this residual
constexpr double kReferenceTol = 1e-12;

/// Hash of the reference-relevant part of the config.
uint64_t reference_key(const RunConfig& cfg) {
  RunConfig sub;
  sub.scenario = cfg.scenario;
  sub.seed = cfg.seed;
  sub.eta_exp = cfg.eta_exp;
  sub.h_exp = cfg.h_exp;
  sub.k_override = cfg.k_override;
  sub.eps_scale = cfg.eps_scale;
  sub.ref_max_iters = cfg.ref_max_iters;
  sub.raster_eps = cfg.raster_eps;
  sub.raster_n = cfg.raster_n;
  uint64_t h = fnv1a64(to_manifest_json(sub));
  // raster overrides contribute by content, not just path
  for (const auto& path : {cfg.raster_eps, cfg.raster_n}) {
    if (path.empty()) continue;
    std::ifstream in(path);
    std::string body((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    h ^= fnv1a64(body);
  }
  return h;
}

CVector compute_reference(const RunConfig& cfg, const Problem& problem) {
  namespace fs = std::filesystem;
  fs::path cache_file;
  if (!cfg.reference_cache.empty()) {
    fs::create_directories(cfg.reference_cache);
    char name[48];
    std::snprintf(name, sizeof(name), "ref_%016llx.field",
                  static_cast<unsigned long long>(reference_key(cfg)));
    cache_file = fs::path(cfg.reference_cache) / name;
    if (fs::exists(cache_file)) return read_field(cache_file);
  }
  IterationConfig it = iteration_config(cfg);
  it.max_iters = cfg.ref_max_iters;
  it.residual_tol = kReferenceTol;
  const FineResult ref = solve_fine_reference(problem, it);
  if (!ref.report.converged)
    throw NonConvergenceError(
        "fine reference did not reach the residual tolerance within " +
        std::to_string(cfg.ref_max_iters) + " iterations");
  if (!cache_file.empty())
    write_field(cache_file, ref.solution.values,
                problem.hier.fine.nodes_per_axis());
  return ref.solution.values;
}

void write_report_csv(const std::filesystem::path& path,
                      const IterationReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : report.entries)
    rows.push_back({std::to_string(e.iteration), format_double(e.residual),
                    std::to_string(e.updated),
                    format_double(e.updated_fraction),
                    format_double(e.rel_energy_error),
                    format_double(e.wall_seconds)});
  write_csv(path,
            {"iteration", "residual", "updated", "updated_fraction",
             "rel_energy_error", "wall_seconds"},
            rows);
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<IndicatorTraceRow>& trace) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : trace)
    rows.push_back({std::to_string(r.iteration), std::to_string(r.element),
                    format_double(r.value), r.marked ? "1" : "0"});
  write_csv(path, {"iteration", "element", "indicator", "marked"}, rows);
}

RunArtifacts summarize(const IterationReport& report) {
  RunArtifacts a;
  a.report = report;
  a.converged = report.converged;
  a.iterations = static_cast<int>(report.entries.size());
  a.min_rel_error = std::numeric_limits<double>::quiet_NaN();
  a.final_rel_error = std::numeric_limits<double>::quiet_NaN();
  a.max_update_fraction_after_first = 0.0;
  for (const auto& e : report.entries) {
    if (!std::isnan(e.rel_energy_error)) {
      if (std::isnan(a.min_rel_error) || e.rel_energy_error < a.min_rel_error)
        a.min_rel_error = e.rel_energy_error;
      a.final_rel_error = e.rel_energy_error;
    }
    if (e.iteration > 1)
      a.max_update_fraction_after_first =
          std::max(a.max_update_fraction_after_first, e.updated_fraction);
  }
  return a;
}

}  // namespace

RunArtifacts run_single(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  validate(cfg);
  const Problem problem = build_problem(cfg);
  const fs::path out(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string());

  {
    std::ofstream manifest(out / "manifest.json");
    manifest << to_manifest_json(cfg);
    if (!manifest) throw IoError("cannot write manifest.json");
  }

  RunArtifacts artifacts;
  const int nodes_axis = problem.hier.fine.nodes_per_axis();
  if (cfg.method == "fine_reference") {
    IterationConfig it = iteration_config(cfg);
    it.max_iters = cfg.ref_max_iters;
    const FineResult result = solve_fine_reference(problem, it);
    write_report_csv(out / "iteration_report.csv", result.report);
    write_field(out / "field.txt", result.solution.values, nodes_axis);
    artifacts = summarize(result.report);
  } else {
    const CVector reference = compute_reference(cfg, problem);
    IterationConfig it = iteration_config(cfg);
    std::unique_ptr<CorrectorCache> cache;
    if (!cfg.corrector_cache.empty()) {
      cache = std::make_unique<CorrectorCache>(cfg.corrector_cache);
      it.cache = cache.get();
    }
    const LodResult result =
        solve_adaptive_lod(problem, it, mode_of(cfg.method), &reference);
    write_report_csv(out / "iteration_report.csv", result.report);
    write_trace_csv(out / "indicator_trace.csv", result.trace);
    if (!result.fine_iterates.empty())
      write_field(out / "field.txt", result.fine_iterates.back(), nodes_axis);
    if (cfg.dump_iterates) {
      for (size_t i = 0; i < result.fine_iterates.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "field_iter_%03zu.txt", i + 1);
        write_field(out / name, result.fine_iterates[i], nodes_axis);
      }
    }
    artifacts = summarize(result.report);
  }
  artifacts.out_dir = out;
  return artifacts;
}

std::vector<RunArtifacts> run_convergence_study(
    const RunConfig& base, const std::vector<int>& H_exps,
    const std::vector<std::string>& methods) {
  namespace fs = std::filesystem;
  if (H_exps.empty() || methods.empty())
    throw ConfigError("study needs at least one H exponent and one method");
  RunConfig shared = base;
  if (shared.reference_cache.empty())
    shared.reference_cache = (fs::path(base.out_dir) / "ref_cache").string();

  struct Row {
    int H_exp;
    std::string method;
    RunArtifacts artifacts;
  };
  std::vector<Row> table;
  std::vector<RunArtifacts> all;
  for (const auto& method : methods) {
    for (int H : H_exps) {
      RunConfig cfg = shared;
      cfg.H_exp = H;
      cfg.method = method;
      cfg.out_dir =
          (fs::path(base.out_dir) / ("H" + std::to_string(H) + "_" + method))
              .string();
      Row row{H, method, run_single(cfg)};
      all.push_back(row.artifacts);
      table.push_back(std::move(row));
    }
  }

  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < table.size(); ++i) {
    const Row& r = table[i];
    double eoc = std::numeric_limits<double>::quiet_NaN();
    if (i > 0 && table[i - 1].method == r.method) {
      const double h_prev = std::pow(0.5, table[i - 1].H_exp);
      const double h_cur = std::pow(0.5, r.H_exp);
      eoc = std::log(table[i - 1].artifacts.min_rel_error /
                     r.artifacts.min_rel_error) /
            std::log(h_prev / h_cur);
    }
    rows.push_back({format_double(std::pow(0.5, r.H_exp)), r.method,
                    format_double(r.artifacts.min_rel_error),
                    format_double(r.artifacts.final_rel_error),
                    std::to_string(r.artifacts.iterations),
                    format_double(r.artifacts.max_update_fraction_after_first),
                    format_double(eoc)});
  }
  write_csv(fs::path(base.out_dir) / "study.csv",
            {"H", "method", "min_rel_error", "final_rel_error", "iterations",
             "max_update_fraction", "eoc"},
            rows);
  return all;
}

std::vector<RunArtifacts> run_tolerance_sweep(const RunConfig& base,
                                              const std::vector<double>& tols) {
  namespace fs = std::filesystem;
  if (tols.empty()) throw ConfigError("sweep needs at least one tolerance");
  RunConfig shared = base;
  if (shared.reference_cache.empty())
    shared.reference_cache = (fs::path(base.out_dir) / "ref_cache").string();

  std::vector<std::vector<std::string>> rows;
  std::vector<RunArtifacts> all;
  for (size_t i = 0; i < tols.size(); ++i) {
    RunConfig cfg = shared;
    cfg.method = "lod_adaptive";
    cfg.strategy = "fixed";
    cfg.fixed_tol = tols[i];
    cfg.out_dir =
        (fs::path(base.out_dir) / ("tol_" + std::to_string(i))).string();
    const RunArtifacts artifacts = run_single(cfg);
    for (const auto& e : artifacts.report.entries)
      rows.push_back({format_double(tols[i]), std::to_string(e.iteration),
                      format_double(e.rel_energy_error)});
    all.push_back(artifacts);
  }
  write_csv(fs::path(base.out_dir) / "sweep.csv",
            {"tol", "iteration", "rel_energy_error"}, rows);
  return all;
}

double least_squares_eoc(const std::vector<double>& H,
                         const std::vector<double>& err) {
  if (H.size() != err.size() || H.size() < 2)
    throw std::invalid_argument("least_squares_eoc: need matching sizes >= 2");
  const size_t n = H.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(H[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hlod
