#include "hlod/mesh.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hlod {

std::vector<MeshLevel::Edge> MeshLevel::boundary_edges() const {
  std::vector<Edge> edges;
  edges.reserve(4 * cells);
  for (int i = 0; i < cells; ++i) {
    edges.push_back({node_id(i, 0), node_id(i + 1, 0)});          // bottom
    edges.push_back({node_id(i, cells), node_id(i + 1, cells)});  // top
    edges.push_back({node_id(0, i), node_id(0, i + 1)});          // left
    edges.push_back({node_id(cells, i), node_id(cells, i + 1)});  // right
  }
  return edges;
}

void MeshLevel::elem_boundary_edges(int e, std::vector<Edge>& out) const {
  auto [ex, ey] = elem_coords(e);
  if (ey == 0) out.push_back({node_id(ex, 0), node_id(ex + 1, 0)});
  if (ey == cells - 1)
    out.push_back({node_id(ex, cells), node_id(ex + 1, cells)});
  if (ex == 0) out.push_back({node_id(0, ey), node_id(0, ey + 1)});
  if (ex == cells - 1)
    out.push_back({node_id(cells, ey), node_id(cells, ey + 1)});
}

std::vector<int> MeshHierarchy::fine_children(int coarse_elem) const {
  const int r = fine_per_coarse();
  auto [cx, cy] = coarse.elem_coords(coarse_elem);
  std::vector<int> out;
  out.reserve(r * r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) out.push_back(fine.elem_id(cx * r + i, cy * r + j));
  return out;
}

int MeshHierarchy::coeff_parent(int fine_elem) const {
  const int r = fine_per_coeff();
  auto [fx, fy] = fine.elem_coords(fine_elem);
  return coeff.elem_id(fx / r, fy / r);
}

int MeshHierarchy::coarse_parent(int fine_elem) const {
  const int r = fine_per_coarse();
  auto [fx, fy] = fine.elem_coords(fine_elem);
  return coarse.elem_id(fx / r, fy / r);
}

MeshHierarchy build_hierarchy(int H_exp, int eta_exp, int h_exp) {
  if (H_exp < 1 || eta_exp < H_exp || h_exp < eta_exp) {
    throw std::invalid_argument(
        "build_hierarchy: exponents must satisfy 1 <= H_exp <= eta_exp <= "
        "h_exp, got (" +
        std::to_string(H_exp) + "," + std::to_string(eta_exp) + "," +
        std::to_string(h_exp) + ")");
  }
  MeshHierarchy hier;
  hier.coarse.cells = 1 << H_exp;
  hier.coeff.cells = 1 << eta_exp;
  hier.fine.cells = 1 << h_exp;
  return hier;
}

Patch make_patch(const MeshHierarchy& hier, int T, int layers) {
  if (T < 0 || T >= hier.coarse.num_elements())
    throw std::out_of_range("make_patch: element id out of range");
  if (layers < 1) throw std::invalid_argument("make_patch: layers must be >= 1");

  const MeshLevel& ch = hier.coarse;
  const MeshLevel& fh = hier.fine;
  const int r = hier.fine_per_coarse();

  Patch p;
  p.center_element = T;
  p.layers = layers;
  auto [tx, ty] = ch.elem_coords(T);
  p.ex0 = std::max(0, tx - layers);
  p.ex1 = std::min(ch.cells - 1, tx + layers);
  p.ey0 = std::max(0, ty - layers);
  p.ey1 = std::min(ch.cells - 1, ty + layers);

  for (int ey = p.ey0; ey <= p.ey1; ++ey)
    for (int ex = p.ex0; ex <= p.ex1; ++ex) p.elements.push_back(ch.elem_id(ex, ey));

  const int fx0 = p.ex0 * r, fx1 = (p.ex1 + 1) * r - 1;
  const int fy0 = p.ey0 * r, fy1 = (p.ey1 + 1) * r - 1;
  for (int fy = fy0; fy <= fy1; ++fy)
    for (int fx = fx0; fx <= fx1; ++fx)
      p.fine_elements.push_back(fh.elem_id(fx, fy));

  p.nx0 = fx0;
  p.nx1 = fx1 + 1;
  p.ny0 = fy0;
  p.ny1 = fy1 + 1;
  p.fine_dofs.reserve((p.nx1 - p.nx0 + 1) * (p.ny1 - p.ny0 + 1));
  p.zero_trace.reserve(p.fine_dofs.capacity());
  for (int iy = p.ny0; iy <= p.ny1; ++iy) {
    for (int ix = p.nx0; ix <= p.nx1; ++ix) {
      p.fine_dofs.push_back(fh.node_id(ix, iy));
      // A node is free iff every fine element of D adjacent to it lies in
      // the patch; otherwise a continuous function vanishing outside the
      // patch must vanish at the node.
      bool free = true;
      for (int ey = iy - 1; ey <= iy; ++ey) {
        for (int ex = ix - 1; ex <= ix; ++ex) {
          if (ex < 0 || ey < 0 || ex >= fh.cells || ey >= fh.cells) continue;
          if (ex < fx0 || ex > fx1 || ey < fy0 || ey > fy1) free = false;
        }
      }
      p.zero_trace.push_back(free ? 0 : 1);
    }
  }

  for (int iy = p.ey0; iy <= p.ey1 + 1; ++iy)
    for (int ix = p.ex0; ix <= p.ex1 + 1; ++ix)
      p.coarse_nodes.push_back(ch.node_id(ix, iy));

  return p;
}

}  // namespace hlod
