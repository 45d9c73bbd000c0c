#include "hlod/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "hlod/io.hpp"
#include "hlod/parallel.hpp"

namespace hlod {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

EnergyError energy_error(const MeshLevel& fine, const CVector& u_ref,
                         const CVector& u_approx, double k) {
  const EnergyNorm norm(fine);
  const double ref = norm(u_ref, k);
  if (ref == 0.0)
    throw std::invalid_argument("energy_error: reference has zero norm");
  EnergyError err;
  err.absolute = norm(u_ref - u_approx, k);
  err.relative = err.absolute / ref;
  return err;
}

FineResult solve_fine_reference(const Problem& problem,
                                const IterationConfig& cfg) {
  const MeshLevel& fh = problem.hier.fine;
  const double k = problem.k;

  // static blocks of the linearized form; only the Kerr mass changes
  const SpMat stiff = assemble_stiffness(fh, problem.A);
  const SpMat mass_n = assemble_weighted_mass(fh, problem.n);
  const SpMat mass_b = assemble_boundary_mass(fh);
  const CSpMat base = (stiff - k * k * mass_n).cast<Complex>() +
                      Complex(0.0, k) * mass_b.cast<Complex>();

  CVector u = CVector::Zero(fh.num_nodes());
  if (cfg.initial_coarse.size() > 0) {
    const auto op = build_quasi_interpolation(problem.hier);
    u = op.prolong.cast<Complex>() * cfg.initial_coarse;
  }

  const double load_norm = problem.load.norm();
  FineResult result;
  for (int m = 1; m <= cfg.max_iters; ++m) {
    const double t0 = now_seconds();
    const CoefficientField w = nonlinear_weight(fh, u, problem.n, problem.eps);
    const CSpMat blin =
        base - (k * k) * assemble_weighted_mass(fh, w).cast<Complex>();
    u = sparse_solve(blin, problem.load);

    // nonlinear residual: the full form evaluated at the new iterate
    const CoefficientField w_new =
        nonlinear_weight(fh, u, problem.n, problem.eps);
    const CSpMat bfull =
        base - (k * k) * assemble_weighted_mass(fh, w_new).cast<Complex>();
    const double res =
        load_norm > 0 ? (bfull * u - problem.load).norm() / load_norm : 0.0;

    IterationEntry entry;
    entry.iteration = m;
    entry.residual = res;
    entry.updated = 0;
    entry.updated_fraction = 0.0;
    entry.rel_energy_error = kNaN;
    entry.wall_seconds = now_seconds() - t0;
    result.report.entries.push_back(entry);
    if (res <= cfg.residual_tol) {
      result.report.converged = true;
      break;
    }
  }
  result.solution = DofFunction{Level::Fine, u};
  return result;
}

LodResult solve_adaptive_lod(const Problem& problem, const IterationConfig& cfg,
                             LodMode mode, const CVector* reference) {
  const MeshHierarchy& hier = problem.hier;
  const MeshLevel& fh = hier.fine;
  const MeshLevel& ch = hier.coarse;
  const double k = problem.k;
  const int n_elems = ch.num_elements();
  const auto op = build_quasi_interpolation(hier);
  const CSpMat prolong_c = op.prolong.cast<Complex>();
  const CSpMat restrict_c = CSpMat(prolong_c.transpose());

  std::vector<ElementCorrector> correctors(n_elems);
  std::vector<IndicatorFactors> factors(n_elems);
  if (mode == LodMode::Fem) {
    // trivial zero correctors keep the assembly path uniform
    for (int t = 0; t < n_elems; ++t) {
      correctors[t].element = t;
      correctors[t].layers = cfg.layers;
      correctors[t].basis_corrections = Eigen::MatrixXcd::Zero(0, 4);
    }
  }

  const std::optional<EnergyNorm> norm =
      reference ? std::optional<EnergyNorm>(fh) : std::nullopt;
  double ref_norm = 0.0;
  if (reference) ref_norm = (*norm)(*reference, k);

  CVector u_coarse = cfg.initial_coarse.size() > 0
                         ? cfg.initial_coarse
                         : CVector::Zero(ch.num_nodes());
  CVector u_fine = prolong_c * u_coarse;

  const CVector coarse_load = restrict_c * problem.load;
  const double load_norm = coarse_load.norm();

  LodResult result;
  for (int m = 1; m <= cfg.max_iters; ++m) {
    const double t0 = now_seconds();
    const CoefficientField weight =
        nonlinear_weight(fh, u_fine, problem.n, problem.eps);

    int updated = 0;
    if (mode != LodMode::Fem) {
      std::vector<double> values(
          n_elems, std::numeric_limits<double>::infinity());
      IndicatorState state;
      const bool evaluate =
          mode == LodMode::Adaptive && m > 1;  // Frozen/Full skip evaluation
      if (evaluate) {
        parallel_for(n_elems, cfg.workers, [&](int t) {
          values[t] = evaluate_indicator(hier, factors[t], weight,
                                         correctors[t]);
        });
        state = mark_elements(values, cfg.strategy, cfg.mark_param, m);
      } else if (m == 1 || mode == LodMode::Full) {
        state = mark_elements(values, cfg.strategy, cfg.mark_param, 1);
      } else {  // Frozen beyond the first iteration
        state.values = values;
        state.tol = std::numeric_limits<double>::infinity();
        state.marked.assign(n_elems, 0);
      }
      if (m == 1 || evaluate) {
        for (int t = 0; t < n_elems; ++t)
          result.trace.push_back(
              {m, t, state.values[t], state.marked[t] != 0});
      }

      std::vector<int> to_update;
      for (int t = 0; t < n_elems; ++t)
        if (state.marked[t]) to_update.push_back(t);
      updated = static_cast<int>(to_update.size());
      parallel_for(static_cast<int>(to_update.size()), cfg.workers, [&](int i) {
        const int t = to_update[i];
        bool loaded = false;
        if (cfg.cache) {
          ElementCorrector c;
          if (cfg.cache->load(hier, t, cfg.layers, weight, c)) {
            correctors[t] = std::move(c);
            loaded = true;
          }
        }
        if (!loaded) {
          correctors[t] = compute_element_corrector(
              hier, op, t, cfg.layers, weight, problem.A, problem.n, k);
          if (cfg.cache) cfg.cache->store(hier, correctors[t]);
        }
        factors[t] = compute_factors(hier, correctors[t]);
      });
    } else {
      updated = (m == 1) ? n_elems : 0;
    }

    LodSystem sys = assemble_lod_system(hier, op, correctors, weight,
                                        problem.A, problem.n, k, problem.load);
    CVector u_next;
    try {
      u_next = sparse_solve(sys.coarse_matrix, sys.coarse_load);
    } catch (const SingularSystemError&) {
      throw SingularSystemError(
          "coarse multiscale system is singular; the resolution condition "
          "kH <~ 1 is likely violated");
    }
    u_coarse = u_next;
    u_fine = prolongate_ms_solution(op, sys, u_coarse);

    // nonlinear residual tested against the coarse space
    const CoefficientField w_new =
        nonlinear_weight(fh, u_fine, problem.n, problem.eps);
    const CSpMat bfull = assemble_blin(fh, problem.A, problem.n, w_new, k).matrix;
    const double res =
        load_norm > 0
            ? (restrict_c * (bfull * u_fine) - coarse_load).norm() / load_norm
            : 0.0;

    result.coarse_iterates.push_back(u_coarse);
    result.fine_iterates.push_back(u_fine);

    IterationEntry entry;
    entry.iteration = m;
    entry.residual = res;
    entry.updated = updated;
    entry.updated_fraction =
        n_elems > 0 ? static_cast<double>(updated) / n_elems : 0.0;
    entry.rel_energy_error =
        reference ? (*norm)(*reference - u_fine, k) / ref_norm : kNaN;
    entry.wall_seconds = now_seconds() - t0;
    result.report.entries.push_back(entry);

    if (res <= cfg.residual_tol) {
      result.report.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace hlod
