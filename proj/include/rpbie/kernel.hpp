#pragma once

// Helmholtz free-space kernels.
//
//   G(r, r')        = exp(i k d) / (4 pi d),  d = |r - r'|
//   dG/dn'(r, r')   = n' . grad_{r'} G = exp(i k d)/(4 pi d^2) (1/d - i k) ((r - r') . n')
//
// The normal derivative is taken at the source point with the outward normal,
// which reproduces the unit-sphere eigenvalue
//   D[Y_l^m] = (i k^2 / 2) (j_l h_l' + j_l' h_l) Y_l^m.

#include "rpbie/types.hpp"

namespace rpbie {

enum class Formulation {
  CombinedField,  ///< K = dG/dn' - i k G, closed surfaces
  SingleLayer,    ///< K = G, open surfaces
};

/// Formulation plus wavenumber. k = 0 is accepted and gives the Laplace limit.
struct KernelKind {
  Formulation formulation = Formulation::CombinedField;
  double k = 1.0;
};

cplx green(double k, const Vec3& r, const Vec3& rp);
cplx green_dn(double k, const Vec3& r, const Vec3& rp, const Vec3& np);
cplx kernel_eval(const KernelKind& kind, const Vec3& r, const Vec3& rp, const Vec3& np);

/// Kernel from the pieces of a precomputed difference vector; the hot loops
/// use this form. diff = r - r', dist = |diff| > 0.
inline cplx kernel_from_diff(Formulation f, double k, const Vec3& diff, double dist, const Vec3& np) {
  const double inv_d = 1.0 / dist;
  const double g = inv_d * (1.0 / (4.0 * pi));
  const double kd = k * dist;
  const cplx G(g * std::cos(kd), g * std::sin(kd));
  if (f == Formulation::SingleLayer) return G;
  const double proj = diff.dot(np) * inv_d;  // ((r - r') . n') / d
  // dG/dn' - i k G = G [ (1/d - i k) proj - i k ]
  return G * cplx(proj * inv_d, -k * (proj + 1.0));
}

}  // namespace rpbie
