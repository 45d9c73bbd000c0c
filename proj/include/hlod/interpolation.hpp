#pragma once

#include "hlod/fem.hpp"
#include "hlod/mesh.hpp"

namespace hlod {

/// Fine-to-coarse quasi-interpolation (elementwise L2 projection onto the
/// coarse Q1 space followed by vertex averaging) together with the exact Q1
/// prolongation. coarsen * prolong is the identity on coarse functions.
struct InterpolationOperator {
  SpMatR coarsen;  // coarse nodes x fine nodes
  SpMat prolong;   // fine nodes x coarse nodes
};

InterpolationOperator build_quasi_interpolation(const MeshHierarchy& hier);

/// Value of the coarse element shape function `corner` (order (0,0), (1,0),
/// (0,1), (1,1)) at the fine node with local integer coordinates (lx, ly) in
/// 0..r, where r is the fine-per-coarse ratio.
double coarse_shape_value(int r, int corner, int lx, int ly);

/// Constraint matrix defining the fine-scale space on a patch: the rows of
/// the coarsen matrix for coarse nodes whose basis support meets the patch,
/// with columns restricted to the patch fine dofs (local indexing). Rows
/// without any entry in the patch are dropped. A function supported on the
/// patch is a fine-scale function iff this matrix annihilates it.
SpMatR kernel_constraints(const InterpolationOperator& op,
                          const MeshHierarchy& hier, const Patch& patch);

}  // namespace hlod
