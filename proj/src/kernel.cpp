#include "rpbie/kernel.hpp"

#include <cmath>

namespace rpbie {

cplx green(double k, const Vec3& r, const Vec3& rp) {
  const double d = (r - rp).norm();
  return std::exp(cplx(0.0, k * d)) / (4.0 * pi * d);
}

cplx green_dn(double k, const Vec3& r, const Vec3& rp, const Vec3& np) {
  const Vec3 diff = r - rp;
  const double d = diff.norm();
  return std::exp(cplx(0.0, k * d)) / (4.0 * pi * d * d) * cplx(1.0 / d, -k) * diff.dot(np);
}

cplx kernel_eval(const KernelKind& kind, const Vec3& r, const Vec3& rp, const Vec3& np) {
  if (kind.formulation == Formulation::SingleLayer) return green(kind.k, r, rp);
  return green_dn(kind.k, r, rp, np) - cplx(0.0, kind.k) * green(kind.k, r, rp);
}

}  // namespace rpbie
