#pragma once

// Independent verification paths used only by tests: Gauss-quadrature
// assembly of every form (no reference matrices), random draws from the
// fixed portable generator, and dense kernel projections.

#include <Eigen/Dense>
#include <vector>

#include "hlod/fem.hpp"
#include "hlod/mesh.hpp"
#include "hlod/rng.hpp"

namespace oracle {

using hlod::Complex;
using hlod::CVector;
using hlod::Vector;

inline const double kGaussPoint = 0.5 / std::sqrt(3.0);

/// 2x2 tensor Gauss rule on [0,1]^2 (exact for bidegree <= 3).
struct QuadPoint {
  double x, y, w;
};

inline std::vector<QuadPoint> quad_points() {
  const double a = 0.5 - kGaussPoint, b = 0.5 + kGaussPoint;
  return {{a, a, 0.25}, {b, a, 0.25}, {a, b, 0.25}, {b, b, 0.25}};
}

inline double shape(int c, double x, double y) {
  switch (c) {
    case 0: return (1 - x) * (1 - y);
    case 1: return x * (1 - y);
    case 2: return (1 - x) * y;
    default: return x * y;
  }
}

inline Eigen::Vector2d shape_grad(int c, double x, double y) {
  switch (c) {
    case 0: return {-(1 - y), -(1 - x)};
    case 1: return {1 - y, -x};
    case 2: return {-y, 1 - x};
    default: return {y, x};
  }
}

inline Eigen::MatrixXd stiffness(const hlod::MeshLevel& mesh,
                                 const hlod::CoefficientField& A) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(mesh.num_nodes(), mesh.num_nodes());
  const double s = mesh.h();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.elem_nodes(e);
    for (const auto& q : quad_points()) {
      for (int i = 0; i < 4; ++i) {
        const Eigen::Vector2d gi = shape_grad(i, q.x, q.y) / s;
        for (int j = 0; j < 4; ++j) {
          const Eigen::Vector2d gj = shape_grad(j, q.x, q.y) / s;
          m(nodes[i], nodes[j]) += q.w * s * s * A.values[e] * gi.dot(gj);
        }
      }
    }
  }
  return m;
}

inline Eigen::MatrixXd weighted_mass(const hlod::MeshLevel& mesh,
                                     const hlod::CoefficientField& w) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(mesh.num_nodes(), mesh.num_nodes());
  const double s = mesh.h();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.elem_nodes(e);
    for (const auto& q : quad_points()) {
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          m(nodes[i], nodes[j]) += q.w * s * s * w.values[e] *
                                   shape(i, q.x, q.y) * shape(j, q.x, q.y);
    }
  }
  return m;
}

inline Eigen::MatrixXd boundary_mass(const hlod::MeshLevel& mesh) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(mesh.num_nodes(), mesh.num_nodes());
  const double s = mesh.h();
  const double pts[2] = {0.5 - kGaussPoint, 0.5 + kGaussPoint};
  for (const auto& edge : mesh.boundary_edges()) {
    const int n[2] = {edge.a, edge.b};
    for (double t : pts) {
      const double phi[2] = {1 - t, t};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          m(n[i], n[j]) += 0.5 * s * phi[i] * phi[j];
    }
  }
  return m;
}

inline Eigen::MatrixXcd blin(const hlod::MeshLevel& mesh,
                             const hlod::CoefficientField& A,
                             const hlod::CoefficientField& n,
                             const hlod::CoefficientField& w, double k) {
  hlod::CoefficientField nw = n;
  nw.values += w.values;
  return stiffness(mesh, A).cast<Complex>() -
         k * k * weighted_mass(mesh, nw).cast<Complex>() +
         Complex(0, k) * boundary_mass(mesh).cast<Complex>();
}

/// The linearized form restricted to a set of elements (with the impedance
/// term on the domain-boundary edges of those elements), as a dense global
/// matrix. Quadrature assembly, fully independent of the library path.
inline Eigen::MatrixXcd blin_on(const hlod::MeshLevel& mesh,
                                const std::vector<int>& elems,
                                const hlod::CoefficientField& A,
                                const hlod::CoefficientField& n,
                                const hlod::CoefficientField& w, double k) {
  Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Zero(mesh.num_nodes(), mesh.num_nodes());
  const double s = mesh.h();
  std::vector<hlod::MeshLevel::Edge> edges;
  for (int e : elems) {
    const auto nodes = mesh.elem_nodes(e);
    for (const auto& q : quad_points()) {
      for (int i = 0; i < 4; ++i) {
        const Eigen::Vector2d gi = shape_grad(i, q.x, q.y) / s;
        const double pi = shape(i, q.x, q.y);
        for (int j = 0; j < 4; ++j) {
          const Eigen::Vector2d gj = shape_grad(j, q.x, q.y) / s;
          const double pj = shape(j, q.x, q.y);
          m(nodes[i], nodes[j]) +=
              q.w * s * s *
              (A.values[e] * gi.dot(gj) -
               k * k * (n.values[e] + w.values[e]) * pi * pj);
        }
      }
    }
    edges.clear();
    mesh.elem_boundary_edges(e, edges);
    const double pts[2] = {0.5 - kGaussPoint, 0.5 + kGaussPoint};
    for (const auto& edge : edges) {
      const int nd[2] = {edge.a, edge.b};
      for (double t : pts) {
        const double phi[2] = {1 - t, t};
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            m(nd[i], nd[j]) += Complex(0, k) * 0.5 * s * phi[i] * phi[j];
      }
    }
  }
  return m;
}

inline CVector random_complex(int n, uint64_t seed, double scale = 1.0) {
  hlod::SplitMix64 rng(seed);
  CVector v(n);
  for (int i = 0; i < n; ++i)
    v[i] = scale * Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return v;
}

inline Vector random_real(int n, uint64_t seed, double lo, double hi) {
  hlod::SplitMix64 rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

/// Orthogonal projection onto the nullspace of a (dense-able) constraint
/// matrix: w - C^T (C C^T)^{-1} C w.
inline CVector project_to_kernel(const Eigen::MatrixXd& c, const CVector& w) {
  const Eigen::MatrixXd gram = c * c.transpose();
  const Eigen::VectorXcd cw = c.cast<Complex>() * w;
  const Eigen::VectorXcd lambda = gram.cast<Complex>().ldlt().solve(cw);
  return w - c.transpose().cast<Complex>() * lambda;
}

}  // namespace oracle
