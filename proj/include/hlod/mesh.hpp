#pragma once

#include <array>
#include <vector>

namespace hlod {

/// Uniform tensor-product quadrilateral mesh on the unit square D = (0,1)^2.
/// Nodes and elements are numbered lexicographically, x-fastest:
/// node (ix,iy) -> iy*(cells+1)+ix, element (ex,ey) -> ey*cells+ex.
/// Element corner order is (0,0), (1,0), (0,1), (1,1) in local coordinates.
struct MeshLevel {
  int cells = 1;  // cells per axis

  double h() const { return 1.0 / cells; }
  int nodes_per_axis() const { return cells + 1; }
  int num_nodes() const { return (cells + 1) * (cells + 1); }
  int num_elements() const { return cells * cells; }

  int node_id(int ix, int iy) const { return iy * (cells + 1) + ix; }
  int elem_id(int ex, int ey) const { return ey * cells + ex; }
  std::array<int, 2> elem_coords(int e) const { return {e % cells, e / cells}; }
  std::array<int, 2> node_coords(int n) const {
    return {n % (cells + 1), n / (cells + 1)};
  }

  std::array<int, 4> elem_nodes(int e) const {
    auto [ex, ey] = elem_coords(e);
    return {node_id(ex, ey), node_id(ex + 1, ey), node_id(ex, ey + 1),
            node_id(ex + 1, ey + 1)};
  }

  std::array<double, 2> node_pos(int n) const {
    auto [ix, iy] = node_coords(n);
    return {ix * h(), iy * h()};
  }

  std::array<double, 2> elem_midpoint(int e) const {
    auto [ex, ey] = elem_coords(e);
    return {(ex + 0.5) * h(), (ey + 0.5) * h()};
  }

  bool node_on_boundary(int n) const {
    auto [ix, iy] = node_coords(n);
    return ix == 0 || iy == 0 || ix == cells || iy == cells;
  }

  /// A mesh edge on the domain boundary, by node ids (a < b lexicographically
  /// along the boundary orientation is not guaranteed; a,b are endpoints).
  struct Edge {
    int a = -1;
    int b = -1;
  };

  /// All boundary edges, each exactly once.
  std::vector<Edge> boundary_edges() const;

  /// Boundary edges of a single element (0, 1, or 2 of its four edges).
  void elem_boundary_edges(int e, std::vector<Edge>& out) const;
};

/// Three nested levels: coarse mesh T_H, coefficient mesh T_eta, fine mesh
/// T_h. Cell counts are powers of two so every coarser element is the exact
/// union of finer ones.
struct MeshHierarchy {
  MeshLevel coarse;
  MeshLevel coeff;
  MeshLevel fine;

  int fine_per_coarse() const { return fine.cells / coarse.cells; }
  int fine_per_coeff() const { return fine.cells / coeff.cells; }

  /// Fine elements covered by a coarse element, lexicographic order.
  std::vector<int> fine_children(int coarse_elem) const;
  /// The coeff-level element containing a fine element.
  int coeff_parent(int fine_elem) const;
  /// The coarse element containing a fine element.
  int coarse_parent(int fine_elem) const;
};

/// Builds the nested hierarchy with 2^exp cells per axis on each level.
/// Throws std::invalid_argument unless 1 <= H_exp <= eta_exp <= h_exp.
MeshHierarchy build_hierarchy(int H_exp, int eta_exp, int h_exp);

/// An l-layer patch around a coarse element: the coarse elements within
/// Chebyshev distance l (which is exactly the l-fold vertex neighborhood on
/// a structured quad mesh), the fine nodes they cover, and the zero-trace
/// flags for fine nodes on the patch boundary inside the domain.
struct Patch {
  int center_element = -1;
  int layers = 0;

  // coarse element box, inclusive
  int ex0 = 0, ex1 = 0, ey0 = 0, ey1 = 0;
  // fine node box, inclusive
  int nx0 = 0, nx1 = 0, ny0 = 0, ny1 = 0;

  std::vector<int> elements;       // coarse element ids, ascending
  std::vector<int> fine_elements;  // fine element ids, ascending
  std::vector<int> fine_dofs;      // global fine node ids, ascending
  /// 1 where a kernel function must vanish: the node lies on the closure of
  /// D \ patch (patch boundary away from the domain boundary).
  std::vector<char> zero_trace;
  std::vector<int> coarse_nodes;   // vertex node ids of the patch elements

  int num_fine_dofs() const { return static_cast<int>(fine_dofs.size()); }
  int num_coarse_nodes() const { return static_cast<int>(coarse_nodes.size()); }

  /// Local index of a global fine node, -1 if outside the patch.
  int fine_local(int global_node, const MeshLevel& fine) const {
    auto [ix, iy] = fine.node_coords(global_node);
    if (ix < nx0 || ix > nx1 || iy < ny0 || iy > ny1) return -1;
    return (iy - ny0) * (nx1 - nx0 + 1) + (ix - nx0);
  }

  /// Local index of a global coarse node, -1 if not a patch vertex.
  int coarse_local(int global_node, const MeshLevel& coarse) const {
    auto [ix, iy] = coarse.node_coords(global_node);
    if (ix < ex0 || ix > ex1 + 1 || iy < ey0 || iy > ey1 + 1) return -1;
    return (iy - ey0) * (ex1 - ex0 + 2) + (ix - ex0);
  }
};

/// The l-layer patch of coarse element T. Requires layers >= 1.
Patch make_patch(const MeshHierarchy& hier, int T, int layers);

}  // namespace hlod
