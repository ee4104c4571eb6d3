// Compiled with -ffast-math so that the loops vectorize, including sin
// through the vector math library; see src/CMakeLists.txt. The cosine is
// written as a shifted sine because the compiler would otherwise fuse the pair
// into a scalar sincos call.

#include "rpbie/kernel_sums.hpp"

#include <cmath>

namespace rpbie {

SourceArrays::SourceArrays(const SurfaceDiscretization& disc) {
  const std::size_t n = disc.num_nodes();
  for (auto* v : {&x, &y, &z, &nx, &ny, &nz}) v->resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = disc.points[j].x();
    y[j] = disc.points[j].y();
    z[j] = disc.points[j].z();
    nx[j] = disc.normals[j].x();
    ny[j] = disc.normals[j].y();
    nz[j] = disc.normals[j].z();
  }
}

cplx kernel_sum(Formulation f, double k, const Vec3& r, const SourceArrays& src, const double* wr, const double* wi,
                std::size_t begin, std::size_t end) {
  const double rx = r.x(), ry = r.y(), rz = r.z();
  const double* x = src.x.data();
  const double* y = src.y.data();
  const double* z = src.z.data();
  constexpr double c4pi = 1.0 / (4.0 * pi);
  constexpr double kHalfPi = 0.5 * pi;
  double sr = 0.0, si = 0.0;
  if (f == Formulation::SingleLayer) {
#pragma omp simd reduction(+ : sr, si)
    for (std::size_t j = begin; j < end; ++j) {
      const double dx = rx - x[j], dy = ry - y[j], dz = rz - z[j];
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      const double g = c4pi / d;
      const double gr = g * std::sin(k * d + kHalfPi), gi = g * std::sin(k * d);
      sr += gr * wr[j] - gi * wi[j];
      si += gr * wi[j] + gi * wr[j];
    }
  } else {
    const double* nx = src.nx.data();
    const double* ny = src.ny.data();
    const double* nz = src.nz.data();
#pragma omp simd reduction(+ : sr, si)
    for (std::size_t j = begin; j < end; ++j) {
      const double dx = rx - x[j], dy = ry - y[j], dz = rz - z[j];
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      const double inv = 1.0 / d;
      const double g = c4pi * inv;
      const double gr = g * std::sin(k * d + kHalfPi), gi = g * std::sin(k * d);
      // dG/dn' - i k G = G [ proj / d - i k (proj + 1) ],  proj = (r - r').n' / d
      const double proj = (dx * nx[j] + dy * ny[j] + dz * nz[j]) * inv;
      const double fr = proj * inv, fi = -k * (proj + 1.0);
      const double kr = gr * fr - gi * fi, ki = gr * fi + gi * fr;
      sr += kr * wr[j] - ki * wi[j];
      si += kr * wi[j] + ki * wr[j];
    }
  }
  return {sr, si};
}

void kernel_values(Formulation f, double k, std::size_t n, VecArrays diff, VecArrays normal, const double* jac,
                   double* re, double* im) {
  constexpr double c4pi = 1.0 / (4.0 * pi);
  constexpr double kHalfPi = 0.5 * pi;
  const bool single = f == Formulation::SingleLayer;
#pragma omp simd
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = diff.x[j], dy = diff.y[j], dz = diff.z[j];
    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double inv = 1.0 / d;
    const double g = c4pi * inv * jac[j];
    const double gr = g * std::sin(k * d + kHalfPi), gi = g * std::sin(k * d);
    const double proj = (dx * normal.x[j] + dy * normal.y[j] + dz * normal.z[j]) * inv;
    const double fr = single ? 1.0 : proj * inv;
    const double fi = single ? 0.0 : -k * (proj + 1.0);
    re[j] = gr * fr - gi * fi;
    im[j] = gr * fi + gi * fr;
  }
}

}  // namespace rpbie
