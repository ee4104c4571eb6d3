#pragma once

// Changes of variables built on the Colton–Kress graded map
//
//   w(tau) = 2 pi v(tau)^p / (v(tau)^p + v(2 pi - tau)^p),   0 <= tau <= 2 pi,
//   v(tau) = (1/p - 1/2) ((pi - tau)/pi)^3 + (1/p) (tau - pi)/pi + 1/2,
//
// whose derivatives of order 1..p-1 vanish at both endpoints. Two families
// are derived from it: edge maps that grade the Fejér grid towards flagged
// patch sides, and the rectangular-polar map that grades a 1D rule towards
// an arbitrary point alpha in [-1, 1].

#include <cstdint>
#include <string_view>

namespace rpbie {

struct MapValue {
  double value;
  double deriv;
};

/// Colton–Kress map and its derivative; requires p >= 2, 0 <= tau <= 2 pi.
MapValue ck_map_eval(int p, double tau);
inline double ck_map(int p, double tau) { return ck_map_eval(p, tau).value; }
inline double ck_map_deriv(int p, double tau) { return ck_map_eval(p, tau).deriv; }

/// Which ends of a parameter direction are geometric edges.
enum class EdgeFlag : std::uint8_t { none, both_ends, low_end_only, high_end_only };

std::string_view to_string(EdgeFlag flag);

/// Edge-resolving map s -> u on [-1, 1]. The identity for EdgeFlag::none.
MapValue edge_map(EdgeFlag flag, int p, double s);

/// The s in [-1, 1] with edge_map(flag, p, s).value closest to u, by
/// bisection. u = +-1 returns +-1 exactly.
double edge_map_inverse(EdgeFlag flag, int p, double u);

/// Branch-selection tolerance for alpha = +-1 in singular_map.
inline constexpr double kEndpointAlphaTol = 1e-12;

/// Rectangular-polar map tau -> u on [-1, 1] graded towards u = alpha.
MapValue singular_map(double alpha, int p, double tau);

}  // namespace rpbie
