#pragma once

#include <cstdint>
#include <string>

#include "hlod/fem.hpp"
#include "hlod/mesh.hpp"
#include "hlod/solver.hpp"

namespace hlod {

struct BoxD {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

/// Two-value (or general) pattern sampled over a box: plain-text format
/// "nx ny" header followed by nx*ny row-major values, first row at the
/// bottom of the box (y increasing with row index).
struct Raster {
  int nx = 0, ny = 0;
  std::vector<double> values;

  bool empty() const { return nx == 0 || ny == 0; }
  /// Value at box-relative coordinates (fx, fy) in [0,1]^2.
  double sample(double fx, double fy) const;
};

/// Specification of one coefficient: constant, i.i.d. uniform per
/// coefficient-mesh element, or a raster pattern, each restricted to an
/// active box with a fixed value outside (the boundary collar).
struct CoeffSpec {
  enum class Kind { Constant, RandomUniform, Raster };
  Kind kind = Kind::Constant;
  double value = 1.0;  // Constant: value inside the box
  double lo = 0.0, hi = 1.0;  // RandomUniform bounds
  BoxD box;                   // active region
  double outside = 1.0;       // value outside the box
  Raster raster;              // Raster kind, over the box
  uint64_t stream = 0;        // rng substream tag

  double declared_lo() const;
  double declared_hi() const;
};

enum class SourceKind { Bump, Constant, Beam };

/// A parameterized experiment: wave number, coefficient specs, source, seed.
/// Hierarchy-independent; materialize() realizes it on concrete meshes.
struct Scenario {
  std::string name = "custom";
  double k = 1.0;
  CoeffSpec A, n, eps;
  SourceKind source = SourceKind::Constant;
  double source_amplitude = 1.0;
  uint64_t seed = 0;
};

/// Point-source experiment: rough A, n, eps on the coefficient mesh, a
/// compactly supported bump load of amplitude 10000 at the domain center,
/// k = 17, nonlinearity active on [0.55,0.75]x[0.25,0.45].
Scenario example1(uint64_t seed);
/// Incident-beam experiment: k = 30, analytic volume and boundary sources
/// from the beam profile, rough A on [0.25,0.75]^2, block-array Kerr
/// pattern with value 0.85, n = 1.
Scenario example2(uint64_t seed);
/// Tolerance study experiment: k = 15, f = 100, A = 1,
/// eps = 0.3 on [0.15,0.85]^2, two-value n pattern on the same box.
Scenario example3();

/// i.i.d. uniform values on the given mesh; elements whose midpoint lies
/// outside the active box (if any) are forced to outside_value.
CoefficientField random_field(double lo, double hi, const MeshLevel& mesh,
                              uint64_t seed, const BoxD* active_box = nullptr,
                              double outside_value = 1.0);

/// Realizes one coefficient spec on the coefficient mesh.
CoefficientField realize_field(const CoeffSpec& spec, const MeshLevel& mesh,
                               uint64_t scenario_seed);

/// Materializes a scenario on a hierarchy: coefficient fields replicated to
/// the fine mesh and the fine load vector assembled. eps_scale multiplies
/// the Kerr coefficient (0 turns the problem linear).
Problem materialize(const Scenario& scenario, const MeshHierarchy& hier,
                    double eps_scale = 1.0);

/// Beam profile helpers (x-dependence only).
Complex beam_value(double x1, double k);
Complex beam_dx(double x1, double k);
Complex beam_volume_source(double x1, double k);  // -u'' - k^2 u

}  // namespace hlod
