#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <stdexcept>
#include <vector>

#include "hlod/mesh.hpp"

namespace hlod {

using Complex = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using CSpMat = Eigen::SparseMatrix<Complex>;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

enum class Level { Coarse, Fine };

/// Complex nodal vector tagged with the mesh level it lives on.
struct DofFunction {
  Level level = Level::Fine;
  CVector values;
};

/// Piecewise-constant real field, one value per element of its mesh level,
/// with the declared admissible bounds.
struct CoefficientField {
  Vector values;
  double lower = 0.0;
  double upper = 0.0;

  static CoefficientField constant(int n_elements, double v) {
    CoefficientField f;
    f.values = Vector::Constant(n_elements, v);
    f.lower = f.upper = v;
    return f;
  }
};

/// Assembled sparse sesquilinear form. All forms here are complex-symmetric
/// (M = M^T), not Hermitian: the only complex block is the impedance term.
struct AssembledForm {
  CSpMat matrix;
  bool complex_symmetric = true;
};

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Q1 stiffness on an axis-aligned square element; scale-invariant in 2D.
/// Corner order (0,0), (1,0), (0,1), (1,1).
Eigen::Matrix4d reference_stiffness();
/// Q1 mass on an s-by-s element: (s^2/36) [[4,2,2,1],[2,4,1,2],[2,1,4,2],[1,2,2,4]].
Eigen::Matrix4d reference_mass(double s);
/// P1 mass on a boundary edge of length s: (s/6) [[2,1],[1,2]].
Eigen::Matrix2d reference_edge_mass(double s);

/// (A grad u, grad v). A is one value per element; values must be positive.
SpMat assemble_stiffness(const MeshLevel& mesh, const CoefficientField& A);
/// (w u, v) with elementwise-constant w >= 0.
SpMat assemble_weighted_mass(const MeshLevel& mesh, const CoefficientField& w);
/// (u, v)_Gamma over the domain boundary.
SpMat assemble_boundary_mass(const MeshLevel& mesh);

/// The elementwise-constant Kerr weight n*eps*|phi|^2, with |phi|^2 taken as
/// the mean of the squared moduli over the four element corners.
CoefficientField nonlinear_weight(const MeshLevel& mesh, const CVector& phi,
                                  const CoefficientField& n,
                                  const CoefficientField& eps);

/// stiffness(A) - k^2 mass(n) - k^2 mass(kerr_weight) + i k boundary_mass.
AssembledForm assemble_blin(const MeshLevel& mesh, const CoefficientField& A,
                            const CoefficientField& n,
                            const CoefficientField& kerr_weight, double k);

/// Load vector from an elementwise-constant complex source.
CVector load_from_element_source(const MeshLevel& mesh, const CVector& f_elem);
/// Load vector from a nodal source: mass matrix times nodal values.
CVector load_from_nodal_source(const MeshLevel& mesh, const CVector& f_nodal);
/// Boundary load (g, v)_Gamma from nodal boundary data (interior entries of
/// g are ignored).
CVector boundary_load(const MeshLevel& mesh, const CVector& g_nodal);
/// (f, v) + (g, v)_Gamma for an elementwise source and optional nodal
/// boundary data.
CVector load_vector(const MeshLevel& mesh, const CVector& f_elem,
                    const CVector* g_nodal);

/// Galerkin restriction P^T M P of a fine form to the coarse space.
CSpMat coarse_assembly(const CSpMat& fine_form, const SpMat& prolong);

/// k-weighted energy norm (|v|_1^2 + k^2 ||v||_0^2)^(1/2) on the full mesh.
double energy_norm(const MeshLevel& mesh, const CVector& v, double k);
/// Same, restricted to a set of elements.
double energy_norm_on(const MeshLevel& mesh, const std::vector<int>& elems,
                      const CVector& v, double k);

/// Caches the unit stiffness and mass matrices for repeated norm evaluations.
class EnergyNorm {
 public:
  explicit EnergyNorm(const MeshLevel& mesh);
  double operator()(const CVector& v, double k) const;

 private:
  SpMat stiffness_;
  SpMat mass_;
};

/// Sparse complex LU solve. Deterministic; throws SingularSystemError if the
/// factorization fails to working precision.
CVector sparse_solve(const CSpMat& M, const CVector& b);

/// Reusable factorization for multiple right-hand sides.
class SparseFactorization {
 public:
  explicit SparseFactorization(const CSpMat& M);
  CVector solve(const CVector& b) const;
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& B) const;

 private:
  Eigen::SparseLU<CSpMat, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace hlod
