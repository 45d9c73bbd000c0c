#pragma once

#include "hlod/fem.hpp"
#include "hlod/interpolation.hpp"
#include "hlod/mesh.hpp"

namespace hlod {

/// Fine-scale corrections of the four shape functions of one coarse element,
/// supported on the l-layer patch, together with the Kerr weight the patch
/// problem was assembled with (needed later by the update indicator).
struct ElementCorrector {
  int element = -1;
  int layers = 0;
  std::vector<int> fine_dofs;          // patch fine node ids, ascending
  Eigen::MatrixXcd basis_corrections;  // num fine dofs x 4
  std::vector<int> patch_fine_elements;
  Vector weight_snapshot;              // kerr weight per patch fine element
};

/// Solves the four patch saddle-point problems for coarse element T: the
/// correction of each element shape function in the fine-scale space on the
/// patch, with the impedance term active on the part of the patch boundary
/// that lies on the domain boundary and zero trace on the rest.
/// kerr_weight is the elementwise field n*eps*|phi|^2 on the fine mesh.
ElementCorrector compute_element_corrector(const MeshHierarchy& hier,
                                           const InterpolationOperator& op,
                                           int element, int layers,
                                           const CoefficientField& kerr_weight,
                                           const CoefficientField& A,
                                           const CoefficientField& n, double k);

/// Adjoint corrections: the complex conjugates of the primal ones (the
/// coarse shape functions are real).
ElementCorrector adjoint_corrector_from(const ElementCorrector& c);

/// Coarse Petrov-Galerkin system: corrected trial functions, plain coarse
/// test functions, plus the map back to the fine mesh.
struct LodSystem {
  CSpMat coarse_matrix;
  CVector coarse_load;
  CSpMat corrections;  // fine nodes x coarse nodes; trial = prolong - corrections
  int layers = 0;
};

LodSystem assemble_lod_system(const MeshHierarchy& hier,
                              const InterpolationOperator& op,
                              const std::vector<ElementCorrector>& correctors,
                              const CoefficientField& kerr_weight,
                              const CoefficientField& A,
                              const CoefficientField& n, double k,
                              const CVector& fine_load);

/// Fine representation of a coarse solution: prolongation minus corrections.
CVector prolongate_ms_solution(const InterpolationOperator& op,
                               const LodSystem& sys,
                               const CVector& coarse_solution);

}  // namespace hlod
