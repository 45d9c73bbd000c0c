#include "hlod/fem.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace hlod {

Eigen::Matrix4d reference_stiffness() {
  Eigen::Matrix4d s;
  const double d = 2.0 / 3.0, e = -1.0 / 6.0, o = -1.0 / 3.0;
  // corner order (0,0), (1,0), (0,1), (1,1): 0-1 and 2-3 share an x-edge,
  // 0-2 and 1-3 a y-edge, 0-3 and 1-2 are diagonal.
  s << d, e, e, o,
       e, d, o, e,
       e, o, d, e,
       o, e, e, d;
  return s;
}

Eigen::Matrix4d reference_mass(double s) {
  Eigen::Matrix4d m;
  m << 4, 2, 2, 1,
       2, 4, 1, 2,
       2, 1, 4, 2,
       1, 2, 2, 4;
  return (s * s / 36.0) * m;
}

Eigen::Matrix2d reference_edge_mass(double s) {
  Eigen::Matrix2d m;
  m << 2, 1,
       1, 2;
  return (s / 6.0) * m;
}

namespace {

void check_field_size(const MeshLevel& mesh, const CoefficientField& f,
                      const char* what) {
  if (f.values.size() != mesh.num_elements())
    throw std::invalid_argument(std::string(what) +
                                ": field size does not match element count");
}

SpMat assemble_elementwise(const MeshLevel& mesh, const Vector& coeff,
                           const Eigen::Matrix4d& local) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(16 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double c = coeff[e];
    if (c == 0.0) continue;
    const auto nodes = mesh.elem_nodes(e);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        trip.emplace_back(nodes[i], nodes[j], c * local(i, j));
  }
  SpMat m(mesh.num_nodes(), mesh.num_nodes());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SpMat assemble_stiffness(const MeshLevel& mesh, const CoefficientField& A) {
  check_field_size(mesh, A, "assemble_stiffness");
  if (A.values.minCoeff() <= 0.0)
    throw std::invalid_argument("assemble_stiffness: A must be positive");
  return assemble_elementwise(mesh, A.values, reference_stiffness());
}

SpMat assemble_weighted_mass(const MeshLevel& mesh, const CoefficientField& w) {
  check_field_size(mesh, w, "assemble_weighted_mass");
  if (w.values.size() > 0 && w.values.minCoeff() < 0.0)
    throw std::invalid_argument("assemble_weighted_mass: negative weight");
  return assemble_elementwise(mesh, w.values, reference_mass(mesh.h()));
}

SpMat assemble_boundary_mass(const MeshLevel& mesh) {
  const auto local = reference_edge_mass(mesh.h());
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& edge : mesh.boundary_edges()) {
    const int n[2] = {edge.a, edge.b};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) trip.emplace_back(n[i], n[j], local(i, j));
  }
  SpMat m(mesh.num_nodes(), mesh.num_nodes());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

CoefficientField nonlinear_weight(const MeshLevel& mesh, const CVector& phi,
                                  const CoefficientField& n,
                                  const CoefficientField& eps) {
  if (phi.size() != mesh.num_nodes())
    throw std::invalid_argument("nonlinear_weight: phi size mismatch");
  check_field_size(mesh, n, "nonlinear_weight");
  check_field_size(mesh, eps, "nonlinear_weight");
  CoefficientField w;
  w.values.resize(mesh.num_elements());
  double hi = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.elem_nodes(e);
    double mean = 0.0;
    for (int i = 0; i < 4; ++i) mean += std::norm(phi[nodes[i]]);
    mean *= 0.25;
    w.values[e] = n.values[e] * eps.values[e] * mean;
    hi = std::max(hi, w.values[e]);
  }
  w.lower = 0.0;
  w.upper = hi;
  return w;
}

AssembledForm assemble_blin(const MeshLevel& mesh, const CoefficientField& A,
                            const CoefficientField& n,
                            const CoefficientField& kerr_weight, double k) {
  const SpMat s = assemble_stiffness(mesh, A);
  const SpMat mn = assemble_weighted_mass(mesh, n);
  const SpMat mw = assemble_weighted_mass(mesh, kerr_weight);
  const SpMat mb = assemble_boundary_mass(mesh);
  AssembledForm form;
  form.matrix = (s - k * k * (mn + mw)).cast<Complex>() +
                Complex(0.0, k) * mb.cast<Complex>();
  form.complex_symmetric = true;
  return form;
}

CVector load_from_element_source(const MeshLevel& mesh, const CVector& f_elem) {
  if (f_elem.size() != mesh.num_elements())
    throw std::invalid_argument("load_from_element_source: size mismatch");
  CVector b = CVector::Zero(mesh.num_nodes());
  const double quarter_area = mesh.h() * mesh.h() / 4.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Complex c = f_elem[e] * quarter_area;
    if (c == Complex(0.0)) continue;
    for (int nd : mesh.elem_nodes(e)) b[nd] += c;
  }
  return b;
}

CVector load_from_nodal_source(const MeshLevel& mesh, const CVector& f_nodal) {
  if (f_nodal.size() != mesh.num_nodes())
    throw std::invalid_argument("load_from_nodal_source: size mismatch");
  const SpMat m = assemble_weighted_mass(
      mesh, CoefficientField::constant(mesh.num_elements(), 1.0));
  return m.cast<Complex>() * f_nodal;
}

CVector boundary_load(const MeshLevel& mesh, const CVector& g_nodal) {
  if (g_nodal.size() != mesh.num_nodes())
    throw std::invalid_argument("boundary_load: size mismatch");
  return assemble_boundary_mass(mesh).cast<Complex>() * g_nodal;
}

CVector load_vector(const MeshLevel& mesh, const CVector& f_elem,
                    const CVector* g_nodal) {
  CVector b = load_from_element_source(mesh, f_elem);
  if (g_nodal) b += boundary_load(mesh, *g_nodal);
  return b;
}

CSpMat coarse_assembly(const CSpMat& fine_form, const SpMat& prolong) {
  const CSpMat p = prolong.cast<Complex>();
  return CSpMat(p.transpose()) * fine_form * p;
}

double energy_norm(const MeshLevel& mesh, const CVector& v, double k) {
  return EnergyNorm(mesh)(v, k);
}

double energy_norm_on(const MeshLevel& mesh, const std::vector<int>& elems,
                      const CVector& v, double k) {
  const Eigen::Matrix4d s = reference_stiffness();
  const Eigen::Matrix4d m = reference_mass(mesh.h());
  double acc = 0.0;
  Eigen::Vector4cd loc;
  for (int e : elems) {
    const auto nodes = mesh.elem_nodes(e);
    for (int i = 0; i < 4; ++i) loc[i] = v[nodes[i]];
    acc += (loc.adjoint() * (s + k * k * m).cast<Complex>() * loc).real()(0);
  }
  return std::sqrt(std::max(0.0, acc));
}

EnergyNorm::EnergyNorm(const MeshLevel& mesh)
    : stiffness_(assemble_stiffness(
          mesh, CoefficientField::constant(mesh.num_elements(), 1.0))),
      mass_(assemble_weighted_mass(
          mesh, CoefficientField::constant(mesh.num_elements(), 1.0))) {}

double EnergyNorm::operator()(const CVector& v, double k) const {
  const double semi = (v.adjoint() * stiffness_.cast<Complex>() * v).real()(0);
  const double l2 = (v.adjoint() * mass_.cast<Complex>() * v).real()(0);
  return std::sqrt(std::max(0.0, semi + k * k * l2));
}

SparseFactorization::SparseFactorization(const CSpMat& M) {
  CSpMat m = M;
  m.makeCompressed();
  lu_.compute(m);
  if (lu_.info() != Eigen::Success)
    throw SingularSystemError(
        "sparse factorization failed: matrix singular to working precision");
}

CVector SparseFactorization::solve(const CVector& b) const {
  return lu_.solve(b);
}

Eigen::MatrixXcd SparseFactorization::solve(const Eigen::MatrixXcd& B) const {
  return lu_.solve(B);
}

CVector sparse_solve(const CSpMat& M, const CVector& b) {
  if (M.rows() != M.cols() || M.rows() != b.size())
    throw std::invalid_argument("sparse_solve: dimension mismatch");
  return SparseFactorization(M).solve(b);
}

}  // namespace hlod
