#include "hlod/problems.hpp"

#include <algorithm>
#include <cmath>

#include "hlod/rng.hpp"

namespace hlod {

double Raster::sample(double fx, double fy) const {
  if (empty()) throw std::logic_error("Raster::sample: empty raster");
  const int ix = std::min(nx - 1, static_cast<int>(fx * nx));
  const int iy = std::min(ny - 1, static_cast<int>(fy * ny));
  return values[static_cast<size_t>(iy) * nx + ix];
}

double CoeffSpec::declared_lo() const {
  switch (kind) {
    case Kind::Constant: return std::min(value, outside);
    case Kind::RandomUniform: return std::min(lo, outside);
    case Kind::Raster: {
      double m = outside;
      for (double v : raster.values) m = std::min(m, v);
      return m;
    }
  }
  return 0.0;
}

double CoeffSpec::declared_hi() const {
  switch (kind) {
    case Kind::Constant: return std::max(value, outside);
    case Kind::RandomUniform: return std::max(hi, outside);
    case Kind::Raster: {
      double m = outside;
      for (double v : raster.values) m = std::max(m, v);
      return m;
    }
  }
  return 0.0;
}

CoefficientField random_field(double lo, double hi, const MeshLevel& mesh,
                              uint64_t seed, const BoxD* active_box,
                              double outside_value) {
  if (lo > hi) throw std::invalid_argument("random_field: lo > hi");
  SplitMix64 rng(seed);
  CoefficientField f;
  f.values.resize(mesh.num_elements());
  // draw for every element in lexicographic order, then apply the collar,
  // so the realization inside the box does not depend on the box itself
  for (int e = 0; e < mesh.num_elements(); ++e)
    f.values[e] = rng.uniform(lo, hi);
  if (active_box) {
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto mid = mesh.elem_midpoint(e);
      if (!active_box->contains(mid[0], mid[1])) f.values[e] = outside_value;
    }
  }
  f.lower = active_box ? std::min(lo, outside_value) : lo;
  f.upper = active_box ? std::max(hi, outside_value) : hi;
  return f;
}

CoefficientField realize_field(const CoeffSpec& spec, const MeshLevel& mesh,
                               uint64_t scenario_seed) {
  CoefficientField f;
  switch (spec.kind) {
    case CoeffSpec::Kind::Constant:
      f.values.resize(mesh.num_elements());
      for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto mid = mesh.elem_midpoint(e);
        f.values[e] =
            spec.box.contains(mid[0], mid[1]) ? spec.value : spec.outside;
      }
      break;
    case CoeffSpec::Kind::RandomUniform:
      return random_field(spec.lo, spec.hi, mesh,
                          substream_seed(scenario_seed, spec.stream), &spec.box,
                          spec.outside);
    case CoeffSpec::Kind::Raster:
      f.values.resize(mesh.num_elements());
      for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto mid = mesh.elem_midpoint(e);
        if (spec.box.contains(mid[0], mid[1])) {
          const double fx =
              (mid[0] - spec.box.x0) / (spec.box.x1 - spec.box.x0);
          const double fy =
              (mid[1] - spec.box.y0) / (spec.box.y1 - spec.box.y0);
          f.values[e] = spec.raster.sample(fx, fy);
        } else {
          f.values[e] = spec.outside;
        }
      }
      break;
  }
  f.lower = spec.declared_lo();
  f.upper = spec.declared_hi();
  return f;
}

namespace {

Raster block_array_raster(int n, double on_value, double off_value) {
  // isolated squares at every other cell of an n-by-n grid
  Raster r;
  r.nx = r.ny = n;
  r.values.resize(static_cast<size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      r.values[static_cast<size_t>(iy) * n + ix] =
          (ix % 2 == 0 && iy % 2 == 0) ? on_value : off_value;
  return r;
}

Raster checkerboard_raster(int n, double a, double b) {
  Raster r;
  r.nx = r.ny = n;
  r.values.resize(static_cast<size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      r.values[static_cast<size_t>(iy) * n + ix] = ((ix + iy) % 2 == 0) ? a : b;
  return r;
}

}  // namespace

Scenario example1(uint64_t seed) {
  Scenario s;
  s.name = "example1";
  s.k = 17.0;
  s.seed = seed;
  s.source = SourceKind::Bump;
  s.source_amplitude = 10000.0;

  s.A.kind = CoeffSpec::Kind::RandomUniform;
  s.A.lo = 0.5;
  s.A.hi = 3.0;
  s.A.box = {0.15, 0.15, 0.85, 0.85};
  s.A.outside = 1.0;
  s.A.stream = 1;

  s.n.kind = CoeffSpec::Kind::RandomUniform;
  s.n.lo = 0.5;
  s.n.hi = 1.0;
  s.n.box = {0.15, 0.15, 0.85, 0.85};
  s.n.outside = 1.0;
  s.n.stream = 2;

  s.eps.kind = CoeffSpec::Kind::RandomUniform;
  s.eps.lo = 0.0;
  s.eps.hi = 9.4;
  s.eps.box = {0.55, 0.25, 0.75, 0.45};
  s.eps.outside = 0.0;
  s.eps.stream = 3;
  return s;
}

Scenario example2(uint64_t seed) {
  Scenario s;
  s.name = "example2";
  s.k = 30.0;
  s.seed = seed;
  s.source = SourceKind::Beam;
  s.source_amplitude = 1.0;

  s.A.kind = CoeffSpec::Kind::RandomUniform;
  s.A.lo = 0.2;
  s.A.hi = 1.0;
  s.A.box = {0.25, 0.25, 0.75, 0.75};
  s.A.outside = 1.0;
  s.A.stream = 1;

  s.n.kind = CoeffSpec::Kind::Constant;
  s.n.value = 1.0;
  s.n.outside = 1.0;

  s.eps.kind = CoeffSpec::Kind::Raster;
  s.eps.box = {0.25, 0.25, 0.75, 0.75};
  s.eps.outside = 0.0;
  s.eps.raster = block_array_raster(16, 0.85, 0.0);
  s.eps.stream = 3;
  return s;
}

Scenario example3() {
  Scenario s;
  s.name = "example3";
  s.k = 15.0;
  s.seed = 0;
  s.source = SourceKind::Constant;
  s.source_amplitude = 100.0;

  s.A.kind = CoeffSpec::Kind::Constant;
  s.A.value = 1.0;
  s.A.outside = 1.0;

  s.n.kind = CoeffSpec::Kind::Raster;
  s.n.box = {0.15, 0.15, 0.85, 0.85};
  s.n.outside = 1.0;
  s.n.raster = checkerboard_raster(16, 1.0, 0.8);
  s.n.stream = 2;

  s.eps.kind = CoeffSpec::Kind::Constant;
  s.eps.value = 0.3;
  s.eps.box = {0.15, 0.15, 0.85, 0.85};
  s.eps.outside = 0.0;
  return s;
}

Complex beam_value(double x1, double k) {
  const Complex phase = std::exp(Complex(0.0, -k * (0.5 * x1 - 0.25)));
  return 0.8 * phase / (std::cosh(50.0 * x1 - 25.0) + 1.0);
}

Complex beam_dx(double x1, double k) {
  const double t = 50.0 * x1 - 25.0;
  const double s = 1.0 / (std::cosh(t) + 1.0);
  const double sp = -50.0 * std::sinh(t) * s * s;
  const Complex phase = std::exp(Complex(0.0, -k * (0.5 * x1 - 0.25)));
  return 0.8 * phase * (Complex(0.0, -0.5 * k) * s + sp);
}

Complex beam_volume_source(double x1, double k) {
  const double t = 50.0 * x1 - 25.0;
  const double s = 1.0 / (std::cosh(t) + 1.0);
  const double sh = std::sinh(t), chh = std::cosh(t);
  const double sp = -50.0 * sh * s * s;
  const double spp = -2500.0 * chh * s * s + 5000.0 * sh * sh * s * s * s;
  const Complex phase = std::exp(Complex(0.0, -k * (0.5 * x1 - 0.25)));
  // f = -u'' - k^2 u = 0.8 e^{phase} (-0.75 k^2 s + i k s' - s'')
  return 0.8 * phase *
         (Complex(-0.75 * k * k * s - spp, 0.0) + Complex(0.0, k) * sp);
}

namespace {

CVector bump_element_source(const MeshLevel& fine, double amplitude) {
  const double radius = 0.05;
  CVector f = CVector::Zero(fine.num_elements());
  for (int e = 0; e < fine.num_elements(); ++e) {
    const auto mid = fine.elem_midpoint(e);
    const double rho =
        std::hypot(mid[0] - 0.5, mid[1] - 0.5) / radius;
    if (rho < 1.0) f[e] = amplitude * std::exp(-1.0 / (1.0 - rho));
  }
  return f;
}

CVector beam_boundary_source(const MeshLevel& fine, double k) {
  // g = grad(u_inc) . nu + i k u_inc; the beam depends on x only
  CVector g = CVector::Zero(fine.num_nodes());
  const Complex ik(0.0, k);
  for (int nd = 0; nd < fine.num_nodes(); ++nd) {
    if (!fine.node_on_boundary(nd)) continue;
    const auto pos = fine.node_pos(nd);
    const auto [ix, iy] = fine.node_coords(nd);
    Complex val = ik * beam_value(pos[0], k);
    if (ix == 0) val -= beam_dx(pos[0], k);
    if (ix == fine.cells) val += beam_dx(pos[0], k);
    g[nd] = val;
  }
  return g;
}

}  // namespace

Problem materialize(const Scenario& scenario, const MeshHierarchy& hier,
                    double eps_scale) {
  Problem p;
  p.hier = hier;
  p.k = scenario.k;

  const CoefficientField a_eta =
      realize_field(scenario.A, hier.coeff, scenario.seed);
  const CoefficientField n_eta =
      realize_field(scenario.n, hier.coeff, scenario.seed);
  CoefficientField eps_eta =
      realize_field(scenario.eps, hier.coeff, scenario.seed);
  eps_eta.values *= eps_scale;
  eps_eta.lower *= eps_scale;
  eps_eta.upper *= eps_scale;

  auto replicate = [&](const CoefficientField& src) {
    CoefficientField dst;
    dst.values.resize(hier.fine.num_elements());
    for (int e = 0; e < hier.fine.num_elements(); ++e)
      dst.values[e] = src.values[hier.coeff_parent(e)];
    dst.lower = src.lower;
    dst.upper = src.upper;
    return dst;
  };
  p.A = replicate(a_eta);
  p.n = replicate(n_eta);
  p.eps = replicate(eps_eta);

  const MeshLevel& fh = hier.fine;
  switch (scenario.source) {
    case SourceKind::Bump:
      p.load = load_from_element_source(
          fh, bump_element_source(fh, scenario.source_amplitude));
      break;
    case SourceKind::Constant:
      p.load = load_from_element_source(
          fh, CVector::Constant(fh.num_elements(), scenario.source_amplitude));
      break;
    case SourceKind::Beam: {
      CVector f_elem(fh.num_elements());
      for (int e = 0; e < fh.num_elements(); ++e)
        f_elem[e] = beam_volume_source(fh.elem_midpoint(e)[0], scenario.k);
      p.load = load_from_element_source(fh, f_elem) +
               boundary_load(fh, beam_boundary_source(fh, scenario.k));
      break;
    }
  }
  return p;
}

}  // namespace hlod
