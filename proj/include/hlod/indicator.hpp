#pragma once

#include "hlod/corrector.hpp"
#include "hlod/fem.hpp"
#include "hlod/mesh.hpp"

namespace hlod {

/// Precomputed eigenvalue factors of the corrector-update indicator: for the
/// corrector of element T and every coarse element K of its patch,
/// mu(T,K) = max over coarse functions v on T of
///           ||chi_T v - correction(v)||_{0,K}^2 / ||v||_{0,T}^2.
struct IndicatorFactors {
  int element = -1;
  std::vector<int> patch_elements;  // coarse ids, aligned with mu
  std::vector<double> mu;
};

/// Solves the small generalized eigenvalue problems (4x4 Gram against the
/// coarse element mass) for every patch element of the corrector.
IndicatorFactors compute_factors(const MeshHierarchy& hier,
                                 const ElementCorrector& corrector);

/// Indicator value E_T for a changed Kerr weight: the weighted patch sum of
/// the per-element max deviation between the new weight and the corrector's
/// snapshot, combined with the precomputed factors.
double evaluate_indicator(const MeshHierarchy& hier,
                          const IndicatorFactors& factors,
                          const CoefficientField& new_weight,
                          const ElementCorrector& snapshot_holder);

enum class MarkStrategy {
  FixedTol,  // tol = param for every iteration
  ZetaTol,   // tol = param * max_T E_T, re-chosen each iteration
};

struct IndicatorState {
  std::vector<double> values;
  double tol = 0.0;
  std::vector<char> marked;
  int num_marked() const;
};

/// Marking with strict inequality E_T > tol. The first iteration marks every
/// element (there are no correctors to reuse yet); the stored values are
/// +infinity there.
IndicatorState mark_elements(const std::vector<double>& values,
                             MarkStrategy strategy, double param,
                             int iteration);

}  // namespace hlod
