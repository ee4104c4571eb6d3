#include "rpbie/covmaps.hpp"

#include <cassert>
#include <cmath>

#include "rpbie/types.hpp"

namespace rpbie {

namespace {

struct CubicValue {
  double v;
  double dv;
};

// v(tau) = (1/p - 1/2) ((pi - tau)/pi)^3 + (1/p) (tau - pi)/pi + 1/2, written
// in powers of x = tau/pi so that v keeps full relative accuracy as tau -> 0.
CubicValue ck_cubic(int p, double tau) {
  const double c = 1.0 / double(p) - 0.5;
  const double x = tau / pi;
  const double c1 = 1.5 - 2.0 / double(p);
  const double v = x * (c1 + x * (3.0 * c - c * x));
  const double dv = (c1 + x * (6.0 * c - 3.0 * c * x)) / pi;
  return {v, dv};
}

}  // namespace

MapValue ck_map_eval(int p, double tau) {
  assert(p >= 2);
  const auto lo = ck_cubic(p, tau);
  const auto hi = ck_cubic(p, 2.0 * pi - tau);
  const double a = std::pow(lo.v, p);
  const double b = std::pow(hi.v, p);
  const double da = double(p) * std::pow(lo.v, p - 1) * lo.dv;
  const double db = -double(p) * std::pow(hi.v, p - 1) * hi.dv;
  const double s = a + b;
  return {2.0 * pi * a / s, 2.0 * pi * (da * b - a * db) / (s * s)};
}

std::string_view to_string(EdgeFlag flag) {
  switch (flag) {
    case EdgeFlag::none: return "none";
    case EdgeFlag::both_ends: return "both";
    case EdgeFlag::low_end_only: return "low";
    case EdgeFlag::high_end_only: return "high";
  }
  return "?";
}

MapValue edge_map(EdgeFlag flag, int p, double s) {
  switch (flag) {
    case EdgeFlag::none:
      return {s, 1.0};
    case EdgeFlag::both_ends: {
      const auto w = ck_map_eval(p, pi * (s + 1.0));
      return {-1.0 + w.value / pi, w.deriv};
    }
    case EdgeFlag::low_end_only: {
      const auto w = ck_map_eval(p, 0.5 * pi * (s + 1.0));
      return {-1.0 + 2.0 * w.value / pi, w.deriv};
    }
    case EdgeFlag::high_end_only: {
      const auto w = ck_map_eval(p, pi + 0.5 * pi * (s + 1.0));
      return {-3.0 + 2.0 * w.value / pi, w.deriv};
    }
  }
  return {s, 1.0};
}

double edge_map_inverse(EdgeFlag flag, int p, double u) {
  if (flag == EdgeFlag::none) return u;
  if (u <= -1.0) return -1.0;
  if (u >= 1.0) return 1.0;
  double lo = -1.0, hi = 1.0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (edge_map(flag, p, mid).value < u ? lo : hi) = mid;
  }
  return std::abs(edge_map(flag, p, lo).value - u) <= std::abs(edge_map(flag, p, hi).value - u) ? lo : hi;
}

MapValue singular_map(double alpha, int p, double tau) {
  if (std::abs(alpha - 1.0) < kEndpointAlphaTol) {
    const auto w = ck_map_eval(p, pi * std::abs(0.5 * (tau - 1.0)));
    return {1.0 - 2.0 * w.value / pi, w.deriv};
  }
  if (std::abs(alpha + 1.0) < kEndpointAlphaTol) {
    const auto w = ck_map_eval(p, pi * std::abs(0.5 * (tau + 1.0)));
    return {-1.0 + 2.0 * w.value / pi, w.deriv};
  }
  const double sgn = (tau > 0.0) ? 1.0 : (tau < 0.0 ? -1.0 : 0.0);
  const auto w = ck_map_eval(p, pi * std::abs(tau));
  // d/dtau of (sgn - alpha)/pi * w(pi |tau|) = (sgn - alpha) sgn w'(pi |tau|)
  const double deriv = (tau == 0.0) ? 0.0 : (1.0 - alpha * sgn) * w.deriv;
  return {alpha + (sgn - alpha) / pi * w.value, deriv};
}

}  // namespace rpbie
