#pragma once

#include <optional>
#include <vector>

#include "hlod/corrector.hpp"
#include "hlod/fem.hpp"
#include "hlod/indicator.hpp"
#include "hlod/interpolation.hpp"
#include "hlod/mesh.hpp"

namespace hlod {

class CorrectorCache;

/// A fully materialized problem instance: hierarchy, wave number, fine-mesh
/// coefficient fields, and the assembled fine load vector.
struct Problem {
  MeshHierarchy hier;
  double k = 1.0;
  CoefficientField A;
  CoefficientField n;
  CoefficientField eps;
  CVector load;
};

struct IterationConfig {
  int max_iters = 20;
  double residual_tol = 1e-12;  // relative algebraic residual
  int layers = 2;
  MarkStrategy strategy = MarkStrategy::ZetaTol;
  double mark_param = 0.5;  // zeta factor or fixed tolerance
  int workers = 1;
  CVector initial_coarse;  // empty = zero start
  CorrectorCache* cache = nullptr;
};

struct IterationEntry {
  int iteration = 0;
  double residual = 0.0;
  int updated = 0;
  double updated_fraction = 0.0;
  double rel_energy_error = 0.0;  // NaN when no reference supplied
  double wall_seconds = 0.0;
};

struct IterationReport {
  std::vector<IterationEntry> entries;
  bool converged = false;
};

struct FineResult {
  DofFunction solution;
  IterationReport report;
};

/// Fine-mesh fixed-point iteration for the nonlinear problem: each step
/// solves the problem linearized at the previous iterate; stops when the
/// relative nonlinear residual drops below residual_tol.
FineResult solve_fine_reference(const Problem& problem,
                                const IterationConfig& cfg);

enum class LodMode {
  Adaptive,  // indicator-driven corrector updates
  Frozen,    // correctors computed once, never updated
  Full,      // all correctors recomputed every iteration
  Fem,       // trivial (zero) correctors: plain coarse Galerkin FEM
};

struct IndicatorTraceRow {
  int iteration = 0;
  int element = 0;
  double value = 0.0;
  bool marked = false;
};

struct LodResult {
  std::vector<CVector> coarse_iterates;
  std::vector<CVector> fine_iterates;  // prolongated multiscale solutions
  IterationReport report;
  std::vector<IndicatorTraceRow> trace;
};

/// The adaptive iterative multiscale method: per iteration, evaluate the
/// update indicator against each corrector's weight snapshot, recompute the
/// marked correctors from the previous iterate, assemble and solve the
/// Petrov-Galerkin coarse system, and prolongate. The residual is the
/// relative Euclidean norm of the nonlinear residual tested against the
/// coarse space, so it is commensurable across lod and fem methods and with
/// the fine driver when the hierarchy degenerates to one level.
LodResult solve_adaptive_lod(const Problem& problem, const IterationConfig& cfg,
                             LodMode mode, const CVector* reference = nullptr);

struct EnergyError {
  double absolute = 0.0;
  double relative = 0.0;
};

/// Energy-norm distance between two fine functions and its value relative to
/// the reference norm. Throws std::invalid_argument on a zero reference.
EnergyError energy_error(const MeshLevel& fine, const CVector& u_ref,
                         const CVector& u_approx, double k);

}  // namespace hlod
