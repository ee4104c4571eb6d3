#pragma once

// Vectorized sums of the Helmholtz kernel over contiguous source ranges, used
// by the far-interaction loops. Sources are stored as structure-of-arrays.

#include <cstddef>
#include <vector>

#include "rpbie/geometry.hpp"
#include "rpbie/kernel.hpp"

namespace rpbie {

struct SourceArrays {
  std::vector<double> x, y, z;
  std::vector<double> nx, ny, nz;

  SourceArrays() = default;
  explicit SourceArrays(const SurfaceDiscretization& disc);
  std::size_t size() const { return x.size(); }
};

/// sum_{j in [begin, end)} K(r, y_j) (wr_j + i wi_j).
cplx kernel_sum(Formulation f, double k, const Vec3& r, const SourceArrays& src, const double* wr, const double* wi,
                std::size_t begin, std::size_t end);

/// Three coordinate arrays of equal length.
struct VecArrays {
  const double* x;
  const double* y;
  const double* z;
};

/// re_j + i im_j = K(r, y_j) J_j from differences r - y_j, unit source
/// normals n_j and area elements J_j. Entries with J_j = 0 must carry a
/// nonzero difference and give 0.
void kernel_values(Formulation f, double k, std::size_t n, VecArrays diff, VecArrays normal, const double* jac,
                   double* re, double* im);

}  // namespace rpbie
