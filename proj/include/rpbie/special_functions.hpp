#pragma once

// Spherical harmonics and spherical Bessel/Hankel functions for the
// unit-sphere layer-operator eigenvalues.

#include "rpbie/types.hpp"

namespace rpbie {

/// Orthonormal spherical harmonic Y_l^m at the direction of x (|x| > 0).
cplx spherical_harmonic(int l, int m, const Vec3& x);

struct SphericalBessel {
  double j, dj;  ///< j_l(x), j_l'(x)
  double y, dy;  ///< y_l(x), y_l'(x)
};

SphericalBessel spherical_bessel(int l, double x);

/// Eigenvalues on the unit sphere, with h_l = j_l + i y_l:
///   S[Y_l^m] = i k j_l(k) h_l(k) Y_l^m
///   D[Y_l^m] = (i k^2 / 2) (j_l h_l' + j_l' h_l) Y_l^m
cplx single_layer_eigenvalue(int l, double k);
cplx double_layer_eigenvalue(int l, double k);
/// 1/2 + D - i k S.
cplx combined_field_eigenvalue(int l, double k);

}  // namespace rpbie
