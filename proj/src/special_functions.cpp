#include "rpbie/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rpbie {

cplx spherical_harmonic(int l, int m, const Vec3& x) {
  if (l < 0 || std::abs(m) > l) throw std::invalid_argument("spherical harmonic needs |m| <= l");
  const double theta = std::acos(std::clamp(x.z() / x.norm(), -1.0, 1.0));
  const double phi = std::atan2(x.y(), x.x());
  const unsigned am = unsigned(std::abs(m));
  double mag = std::sph_legendre(unsigned(l), am, theta);
  if (m < 0 && (am % 2 == 1)) mag = -mag;  // Y_l^{-m} = (-1)^m conj(Y_l^m)
  return mag * std::exp(cplx(0.0, double(m) * phi));
}

SphericalBessel spherical_bessel(int l, double x) {
  const unsigned n = unsigned(l);
  SphericalBessel b{};
  b.j = std::sph_bessel(n, x);
  b.y = std::sph_neumann(n, x);
  if (l == 0) {
    b.dj = -std::sph_bessel(1, x);
    b.dy = -std::sph_neumann(1, x);
  } else {
    b.dj = std::sph_bessel(n - 1, x) - double(l + 1) / x * b.j;
    b.dy = std::sph_neumann(n - 1, x) - double(l + 1) / x * b.y;
  }
  return b;
}

cplx single_layer_eigenvalue(int l, double k) {
  const SphericalBessel b = spherical_bessel(l, k);
  return cplx(0.0, k) * b.j * cplx(b.j, b.y);
}

cplx double_layer_eigenvalue(int l, double k) {
  const SphericalBessel b = spherical_bessel(l, k);
  const cplx h(b.j, b.y), dh(b.dj, b.dy);
  return cplx(0.0, 0.5 * k * k) * (b.j * dh + b.dj * h);
}

cplx combined_field_eigenvalue(int l, double k) {
  return 0.5 + double_layer_eigenvalue(l, k) - cplx(0.0, k) * single_layer_eigenvalue(l, k);
}

}  // namespace rpbie
