#include "hlod/corrector.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace hlod {

namespace {

// B_lin element matrix on a fine element: A*stiffness - k^2 (n+w)*mass.
Eigen::Matrix4cd elem_blin(double a, double n_plus_w, double k, double h) {
  return (a * reference_stiffness() - k * k * n_plus_w * reference_mass(h))
      .cast<Complex>();
}

// Solves the constrained patch problems
//   B x + C^T lambda = r,  C x = 0
// for several right-hand sides. The constraint count is small (the patch
// vertex count), so the constraints are eliminated through a dense Schur
// complement of the factorized B block. B may be singular away from the
// constraint kernel; in that case, or when the computed solution fails the
// residual check, the monolithic saddle-point matrix is factorized instead.
Eigen::MatrixXcd solve_constrained(
    const std::vector<Eigen::Triplet<Complex>>& b_triplets, int nfree,
    const std::vector<Eigen::Triplet<double>>& c_triplets, int ncon,
    const Eigen::MatrixXcd& rhs) {
  CSpMat b(nfree, nfree);
  b.setFromTriplets(b_triplets.begin(), b_triplets.end());
  SpMat c(ncon, nfree);
  c.setFromTriplets(c_triplets.begin(), c_triplets.end());
  const CSpMat cc = c.cast<Complex>();

  const double b_scale = Eigen::VectorXcd(b.diagonal()).cwiseAbs().maxCoeff();
  const double rhs_scale = rhs.cwiseAbs().maxCoeff() + 1e-300;

  bool schur_ok = true;
  Eigen::MatrixXcd solution(nfree, rhs.cols());
  try {
    Eigen::SparseLU<CSpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(b);
    if (lu.info() != Eigen::Success) throw SingularSystemError("B block");

    const Eigen::MatrixXcd z = lu.solve(Eigen::MatrixXcd(cc.transpose()));
    const Eigen::MatrixXcd schur = cc * z;
    const auto schur_lu = schur.fullPivLu();
    if (!schur_lu.isInvertible()) throw SingularSystemError("schur block");

    const Eigen::MatrixXcd y = lu.solve(rhs);
    const Eigen::MatrixXcd lambda = schur_lu.solve(cc * y);
    solution = y - z * lambda;

    // verify both equations; fall back on any loss of accuracy
    const double eq_resid =
        (b * solution + cc.transpose() * lambda - rhs).cwiseAbs().maxCoeff();
    const double con_resid = (cc * solution).cwiseAbs().maxCoeff();
    const double x_scale = solution.cwiseAbs().maxCoeff();
    if (eq_resid > 1e-9 * (rhs_scale + b_scale * x_scale) ||
        con_resid > 1e-11 * (1.0 + x_scale))
      schur_ok = false;
  } catch (const SingularSystemError&) {
    schur_ok = false;
  }
  if (schur_ok) return solution;

  // monolithic saddle-point factorization
  std::vector<Eigen::Triplet<Complex>> trip = b_triplets;
  trip.reserve(trip.size() + 2 * c_triplets.size());
  for (const auto& t : c_triplets) {
    trip.emplace_back(nfree + t.row(), t.col(), Complex(t.value()));
    trip.emplace_back(t.col(), nfree + t.row(), Complex(t.value()));
  }
  CSpMat saddle(nfree + ncon, nfree + ncon);
  saddle.setFromTriplets(trip.begin(), trip.end());
  Eigen::MatrixXcd full_rhs =
      Eigen::MatrixXcd::Zero(nfree + ncon, rhs.cols());
  full_rhs.topRows(nfree) = rhs;
  const SparseFactorization lu(saddle);
  return lu.solve(full_rhs).topRows(nfree);
}

}  // namespace

ElementCorrector compute_element_corrector(const MeshHierarchy& hier,
                                           const InterpolationOperator& op,
                                           int element, int layers,
                                           const CoefficientField& kerr_weight,
                                           const CoefficientField& A,
                                           const CoefficientField& n,
                                           double k) {
  const MeshLevel& fh = hier.fine;
  const Patch patch = make_patch(hier, element, layers);
  const int nloc = patch.num_fine_dofs();

  // local -> free index, skipping zero-trace nodes
  std::vector<int> free_index(nloc, -1);
  int nfree = 0;
  for (int i = 0; i < nloc; ++i)
    if (!patch.zero_trace[i]) free_index[i] = nfree++;

  ElementCorrector corr;
  corr.element = element;
  corr.layers = layers;
  corr.fine_dofs = patch.fine_dofs;
  corr.basis_corrections = Eigen::MatrixXcd::Zero(nloc, 4);
  corr.patch_fine_elements = patch.fine_elements;
  corr.weight_snapshot.resize(patch.fine_elements.size());
  for (size_t i = 0; i < patch.fine_elements.size(); ++i)
    corr.weight_snapshot[i] = kerr_weight.values[patch.fine_elements[i]];

  if (nfree == 0) return corr;  // degenerate patch, correction vanishes

  const double h = fh.h();
  const Complex ik(0.0, k);
  const Eigen::Matrix2d edge_mass = reference_edge_mass(h);

  std::vector<Eigen::Triplet<Complex>> b_triplets;
  b_triplets.reserve(16 * patch.fine_elements.size());
  std::vector<MeshLevel::Edge> edges;
  for (int e : patch.fine_elements) {
    const Eigen::Matrix4cd loc =
        elem_blin(A.values[e], n.values[e] + kerr_weight.values[e], k, h);
    const auto nodes = fh.elem_nodes(e);
    int fr[4];
    for (int i = 0; i < 4; ++i)
      fr[i] = free_index[patch.fine_local(nodes[i], fh)];
    for (int i = 0; i < 4; ++i) {
      if (fr[i] < 0) continue;
      for (int j = 0; j < 4; ++j)
        if (fr[j] >= 0) b_triplets.emplace_back(fr[i], fr[j], loc(i, j));
    }
    edges.clear();
    fh.elem_boundary_edges(e, edges);
    for (const auto& edge : edges) {
      const int en[2] = {edge.a, edge.b};
      int er[2];
      for (int i = 0; i < 2; ++i)
        er[i] = free_index[patch.fine_local(en[i], fh)];
      for (int i = 0; i < 2; ++i) {
        if (er[i] < 0) continue;
        for (int j = 0; j < 2; ++j)
          if (er[j] >= 0)
            b_triplets.emplace_back(er[i], er[j], ik * edge_mass(i, j));
      }
    }
  }

  // constraint rows: coarsen rows restricted to the free patch dofs
  std::vector<Eigen::Triplet<double>> c_triplets;
  int ncon = 0;
  for (int z : patch.coarse_nodes) {
    bool any = false;
    int row = -1;
    for (SpMatR::InnerIterator it(op.coarsen, z); it; ++it) {
      const int local = patch.fine_local(static_cast<int>(it.col()), fh);
      if (local < 0 || free_index[local] < 0) continue;
      if (!any) {
        row = ncon++;
        any = true;
      }
      c_triplets.emplace_back(row, free_index[local], it.value());
    }
  }

  // right-hand sides: the element-restricted form applied to the four coarse
  // shape functions of T
  const int r = hier.fine_per_coarse();
  const auto [tx, ty] = hier.coarse.elem_coords(element);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(nfree, 4);
  for (int e : hier.fine_children(element)) {
    const Eigen::Matrix4cd loc =
        elem_blin(A.values[e], n.values[e] + kerr_weight.values[e], k, h);
    const auto nodes = fh.elem_nodes(e);
    Eigen::Matrix4d shape_vals;  // (element corner a, coarse shape c)
    for (int a = 0; a < 4; ++a) {
      const auto [ix, iy] = fh.node_coords(nodes[a]);
      for (int c = 0; c < 4; ++c)
        shape_vals(a, c) = coarse_shape_value(r, c, ix - tx * r, iy - ty * r);
    }
    const Eigen::Matrix4cd contrib = loc * shape_vals.cast<Complex>();
    for (int i = 0; i < 4; ++i) {
      const int fr = free_index[patch.fine_local(nodes[i], fh)];
      if (fr >= 0) rhs.row(fr) += contrib.row(i);
    }
    edges.clear();
    fh.elem_boundary_edges(e, edges);
    for (const auto& edge : edges) {
      const int en[2] = {edge.a, edge.b};
      Eigen::Matrix<double, 2, 4> esv;
      for (int i = 0; i < 2; ++i) {
        const auto [ix, iy] = fh.node_coords(en[i]);
        for (int c = 0; c < 4; ++c)
          esv(i, c) = coarse_shape_value(r, c, ix - tx * r, iy - ty * r);
      }
      const Eigen::Matrix<Complex, 2, 4> econtrib =
          ik * edge_mass.cast<Complex>() * esv.cast<Complex>();
      for (int i = 0; i < 2; ++i) {
        const int fr = free_index[patch.fine_local(en[i], fh)];
        if (fr >= 0) rhs.row(fr) += econtrib.row(i);
      }
    }
  }

  const Eigen::MatrixXcd sol =
      solve_constrained(b_triplets, nfree, c_triplets, ncon, rhs);
  for (int i = 0; i < nloc; ++i)
    if (free_index[i] >= 0)
      corr.basis_corrections.row(i) = sol.row(free_index[i]);
  return corr;
}

ElementCorrector adjoint_corrector_from(const ElementCorrector& c) {
  ElementCorrector adj = c;
  adj.basis_corrections = c.basis_corrections.conjugate();
  return adj;
}

LodSystem assemble_lod_system(const MeshHierarchy& hier,
                              const InterpolationOperator& op,
                              const std::vector<ElementCorrector>& correctors,
                              const CoefficientField& kerr_weight,
                              const CoefficientField& A,
                              const CoefficientField& n, double k,
                              const CVector& fine_load) {
  const MeshLevel& ch = hier.coarse;
  const MeshLevel& fh = hier.fine;
  if (static_cast<int>(correctors.size()) != ch.num_elements())
    throw std::invalid_argument(
        "assemble_lod_system: need one corrector per coarse element");
  const int layers = correctors.empty() ? 0 : correctors.front().layers;
  for (const auto& c : correctors)
    if (c.layers != layers)
      throw std::invalid_argument(
          "assemble_lod_system: correctors have mixed layer counts");

  LodSystem sys;
  sys.layers = layers;

  std::vector<Eigen::Triplet<Complex>> trip;
  for (const auto& c : correctors) {
    const auto corners = ch.elem_nodes(c.element);
    for (int j = 0; j < 4; ++j) {
      for (size_t i = 0; i < c.fine_dofs.size(); ++i) {
        const Complex v = c.basis_corrections(static_cast<int>(i), j);
        if (v != Complex(0.0)) trip.emplace_back(c.fine_dofs[i], corners[j], v);
      }
    }
  }
  sys.corrections.resize(fh.num_nodes(), ch.num_nodes());
  sys.corrections.setFromTriplets(trip.begin(), trip.end());

  const CSpMat blin = assemble_blin(fh, A, n, kerr_weight, k).matrix;
  const CSpMat p = op.prolong.cast<Complex>();
  const CSpMat trial = p - sys.corrections;
  sys.coarse_matrix = CSpMat(p.transpose()) * (blin * trial);
  sys.coarse_load = CSpMat(p.transpose()) * fine_load;
  return sys;
}

CVector prolongate_ms_solution(const InterpolationOperator& op,
                               const LodSystem& sys,
                               const CVector& coarse_solution) {
  return op.prolong.cast<Complex>() * coarse_solution -
         sys.corrections * coarse_solution;
}

}  // namespace hlod
