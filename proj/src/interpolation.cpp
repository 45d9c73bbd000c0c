#include "hlod/interpolation.hpp"

#include <Eigen/Dense>

namespace hlod {

double coarse_shape_value(int r, int corner, int lx, int ly) {
  const double x = static_cast<double>(lx) / r;
  const double y = static_cast<double>(ly) / r;
  switch (corner) {
    case 0: return (1.0 - x) * (1.0 - y);
    case 1: return x * (1.0 - y);
    case 2: return (1.0 - x) * y;
    default: return x * y;
  }
}

namespace {

// Projection weights on the reference coarse element: row c gives the
// contribution of each fine node (local lexicographic order over the
// (r+1)^2 node box) to corner c of the elementwise L2 projection. The mesh
// is uniform, so the block is the same for every coarse element.
Eigen::MatrixXd local_projection_weights(const MeshHierarchy& hier) {
  const int r = hier.fine_per_coarse();
  const int nloc = (r + 1) * (r + 1);
  const double h = hier.fine.h();
  const double H = hier.coarse.h();

  const Eigen::Matrix4d mass_fine = reference_mass(h);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, nloc);
  // b(c, j) = integral over the coarse element of shape_c * fine basis_j;
  // the coarse shape restricted to a fine element equals its Q1 interpolant
  // there, so the fine element mass matrix integrates the product exactly.
  for (int fy = 0; fy < r; ++fy) {
    for (int fx = 0; fx < r; ++fx) {
      const int loc[4] = {fy * (r + 1) + fx, fy * (r + 1) + fx + 1,
                          (fy + 1) * (r + 1) + fx, (fy + 1) * (r + 1) + fx + 1};
      const int lx[4] = {fx, fx + 1, fx, fx + 1};
      const int ly[4] = {fy, fy, fy + 1, fy + 1};
      for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 4; ++a) {
          const double sv = coarse_shape_value(r, c, lx[a], ly[a]);
          if (sv == 0.0) continue;
          for (int j = 0; j < 4; ++j) b(c, loc[j]) += sv * mass_fine(a, j);
        }
    }
  }
  const Eigen::Matrix4d mass_coarse = reference_mass(H);
  return mass_coarse.ldlt().solve(b);
}

}  // namespace

InterpolationOperator build_quasi_interpolation(const MeshHierarchy& hier) {
  const MeshLevel& ch = hier.coarse;
  const MeshLevel& fh = hier.fine;
  const int r = hier.fine_per_coarse();
  const Eigen::MatrixXd w = local_projection_weights(hier);

  // Vertex multiplicity: number of coarse elements adjacent to a node.
  auto card = [&](int ix, int iy) {
    const int mx = (ix == 0 || ix == ch.cells) ? 1 : 2;
    const int my = (iy == 0 || iy == ch.cells) ? 1 : 2;
    return mx * my;
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(ch.num_elements()) * 4 * w.cols());
  for (int e = 0; e < ch.num_elements(); ++e) {
    auto [ex, ey] = ch.elem_coords(e);
    const int cx[4] = {ex, ex + 1, ex, ex + 1};
    const int cy[4] = {ey, ey, ey + 1, ey + 1};
    for (int c = 0; c < 4; ++c) {
      const int z = ch.node_id(cx[c], cy[c]);
      const double scale = 1.0 / card(cx[c], cy[c]);
      for (int ly = 0; ly <= r; ++ly) {
        for (int lx = 0; lx <= r; ++lx) {
          const double v = w(c, ly * (r + 1) + lx);
          if (v == 0.0) continue;
          const int fnode = fh.node_id(ex * r + lx, ey * r + ly);
          trip.emplace_back(z, fnode, scale * v);
        }
      }
    }
  }
  InterpolationOperator op;
  op.coarsen.resize(ch.num_nodes(), fh.num_nodes());
  op.coarsen.setFromTriplets(trip.begin(), trip.end());

  // Exact Q1 embedding: each fine node is assigned from the coarse element
  // containing it (boundaries agree by continuity).
  trip.clear();
  trip.reserve(static_cast<size_t>(fh.num_nodes()) * 4);
  for (int n = 0; n < fh.num_nodes(); ++n) {
    auto [ix, iy] = fh.node_coords(n);
    const int ex = std::min(ix / r, ch.cells - 1);
    const int ey = std::min(iy / r, ch.cells - 1);
    const int lx = ix - ex * r, ly = iy - ey * r;
    const int cx[4] = {ex, ex + 1, ex, ex + 1};
    const int cy[4] = {ey, ey, ey + 1, ey + 1};
    for (int c = 0; c < 4; ++c) {
      const double v = coarse_shape_value(r, c, lx, ly);
      if (v != 0.0) trip.emplace_back(n, ch.node_id(cx[c], cy[c]), v);
    }
  }
  op.prolong.resize(fh.num_nodes(), ch.num_nodes());
  op.prolong.setFromTriplets(trip.begin(), trip.end());
  return op;
}

SpMatR kernel_constraints(const InterpolationOperator& op,
                          const MeshHierarchy& hier, const Patch& patch) {
  if (patch.elements.empty())
    throw std::invalid_argument("kernel_constraints: empty patch");
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> row_of_node(patch.coarse_nodes.size(), -1);
  int rows = 0;
  for (size_t i = 0; i < patch.coarse_nodes.size(); ++i) {
    const int z = patch.coarse_nodes[i];
    bool any = false;
    for (SpMatR::InnerIterator it(op.coarsen, z); it; ++it) {
      const int local = patch.fine_local(static_cast<int>(it.col()), hier.fine);
      if (local < 0) continue;
      if (!any) {
        row_of_node[i] = rows++;
        any = true;
      }
      trip.emplace_back(row_of_node[i], local, it.value());
    }
  }
  SpMatR c(rows, patch.num_fine_dofs());
  c.setFromTriplets(trip.begin(), trip.end());
  return c;
}

}  // namespace hlod
