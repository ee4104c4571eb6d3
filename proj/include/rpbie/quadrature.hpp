#pragma once

// Fejér first-rule quadrature and Chebyshev expansions on its node grid.
//
// The Fejér-1 nodes are the Chebyshev points of the first kind
// x_j = cos(pi (2j+1) / (2n)), which are also the nodes of the discrete
// orthogonality relation for T_0..T_{n-1}. Both the far-field quadrature and
// the 2D Chebyshev transforms used by the near-field contraction live on this
// grid.

#include <cstddef>
#include <span>
#include <vector>

#include "rpbie/types.hpp"

namespace rpbie {

std::vector<double> fejer_nodes(std::size_t n);
std::vector<double> fejer_weights(std::size_t n);

struct FejerRule {
  std::vector<double> nodes;    ///< strictly decreasing, inside (-1, 1)
  std::vector<double> weights;  ///< positive, sum to 2

  explicit FejerRule(std::size_t n = 1);
  std::size_t size() const { return nodes.size(); }
};

/// T_n(x) by the three-term recurrence.
double cheb_eval(std::size_t n, double x);

/// Fills out[0..out.size()) with T_0(x), T_1(x), ...
void cheb_values(double x, std::span<double> out);

/// Coefficients a(n, m) of sum_{n,m} a(n,m) T_n(u) T_m(v); n runs fastest.
class ChebCoeffGrid {
 public:
  ChebCoeffGrid() = default;
  ChebCoeffGrid(std::size_t n_u, std::size_t n_v) : n_u_(n_u), n_v_(n_v), a_(n_u * n_v) {}

  std::size_t n_u() const { return n_u_; }
  std::size_t n_v() const { return n_v_; }

  cplx& operator()(std::size_t n, std::size_t m) { return a_[n + n_u_ * m]; }
  const cplx& operator()(std::size_t n, std::size_t m) const { return a_[n + n_u_ * m]; }

  std::span<cplx> data() { return a_; }
  std::span<const cplx> data() const { return a_; }

 private:
  std::size_t n_u_ = 0;
  std::size_t n_v_ = 0;
  std::vector<cplx> a_;
};

/// Forward transform of nodal values f(x_i, x_j) stored as f[i + n_u * j] on
/// the Fejér grid of sizes (n_u, n_v). Partial summation, O(n^3).
ChebCoeffGrid cheb_transform_2d(std::span<const cplx> nodal, std::size_t n_u, std::size_t n_v);

/// Clenshaw evaluation of the double series at (u, v).
cplx cheb_eval_2d(const ChebCoeffGrid& coeffs, double u, double v);

}  // namespace rpbie
