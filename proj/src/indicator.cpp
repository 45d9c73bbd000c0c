#include "hlod/indicator.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace hlod {

IndicatorFactors compute_factors(const MeshHierarchy& hier,
                                 const ElementCorrector& corrector) {
  const MeshLevel& fh = hier.fine;
  const MeshLevel& ch = hier.coarse;
  const int r = hier.fine_per_coarse();
  const Patch patch = make_patch(hier, corrector.element, corrector.layers);
  const auto [tx, ty] = ch.elem_coords(corrector.element);

  const Eigen::Matrix4d mass_fine = reference_mass(fh.h());
  const Eigen::Matrix4d mass_coarse = reference_mass(ch.h());

  IndicatorFactors factors;
  factors.element = corrector.element;
  factors.patch_elements = patch.elements;
  factors.mu.reserve(patch.elements.size());

  const int nloc = (r + 1) * (r + 1);
  Eigen::MatrixXd mass_k(nloc, nloc);
  Eigen::MatrixXcd v(nloc, 4);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es;

  for (int kelem : patch.elements) {
    const auto [kx, ky] = ch.elem_coords(kelem);
    // local fine mass over the node box of K
    mass_k.setZero();
    for (int fy = 0; fy < r; ++fy) {
      for (int fx = 0; fx < r; ++fx) {
        const int loc[4] = {fy * (r + 1) + fx, fy * (r + 1) + fx + 1,
                            (fy + 1) * (r + 1) + fx,
                            (fy + 1) * (r + 1) + fx + 1};
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            mass_k(loc[a], loc[b]) += mass_fine(a, b);
      }
    }
    // chi_T * shape - correction on the nodes of K
    const bool is_center = (kelem == corrector.element);
    for (int ly = 0; ly <= r; ++ly) {
      for (int lx = 0; lx <= r; ++lx) {
        const int ix = kx * r + lx, iy = ky * r + ly;
        const int plocal = patch.fine_local(fh.node_id(ix, iy), fh);
        const int loc = ly * (r + 1) + lx;
        for (int c = 0; c < 4; ++c) {
          Complex val = -corrector.basis_corrections(plocal, c);
          if (is_center)
            val += coarse_shape_value(r, c, ix - tx * r, iy - ty * r);
          v(loc, c) = val;
        }
      }
    }
    Eigen::Matrix4cd gram = v.adjoint() * mass_k.cast<Complex>() * v;
    gram = 0.5 * (gram + gram.adjoint().eval());
    es.compute(gram, mass_coarse.cast<Complex>());
    factors.mu.push_back(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  return factors;
}

double evaluate_indicator(const MeshHierarchy& hier,
                          const IndicatorFactors& factors,
                          const CoefficientField& new_weight,
                          const ElementCorrector& snapshot_holder) {
  if (new_weight.values.size() != hier.fine.num_elements())
    throw std::invalid_argument("evaluate_indicator: weight size mismatch");
  if (factors.element != snapshot_holder.element)
    throw std::invalid_argument(
        "evaluate_indicator: factors and snapshot refer to different elements");
  const auto& patch_elems = snapshot_holder.patch_fine_elements;
  double acc = 0.0;
  for (size_t i = 0; i < factors.patch_elements.size(); ++i) {
    double dev = 0.0;
    for (int e : hier.fine_children(factors.patch_elements[i])) {
      const auto it =
          std::lower_bound(patch_elems.begin(), patch_elems.end(), e);
      const auto pos = static_cast<Eigen::Index>(it - patch_elems.begin());
      dev = std::max(dev, std::abs(new_weight.values[e] -
                                   snapshot_holder.weight_snapshot[pos]));
    }
    acc += dev * dev * factors.mu[i];
  }
  return std::sqrt(acc);
}

int IndicatorState::num_marked() const {
  int n = 0;
  for (char m : marked) n += (m != 0);
  return n;
}

IndicatorState mark_elements(const std::vector<double>& values,
                             MarkStrategy strategy, double param,
                             int iteration) {
  IndicatorState state;
  state.values = values;
  state.marked.assign(values.size(), 0);
  if (iteration <= 1) {
    state.tol = std::numeric_limits<double>::infinity();
    std::fill(state.marked.begin(), state.marked.end(), 1);
    return state;
  }
  if (strategy == MarkStrategy::FixedTol) {
    state.tol = param;
  } else {
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, v);
    state.tol = param * mx;
  }
  for (size_t i = 0; i < values.size(); ++i)
    state.marked[i] = values[i] > state.tol ? 1 : 0;
  return state;
}

}  // namespace hlod
