#include "rpbie/quadrature.hpp"

#include <cassert>
#include <cmath>

namespace rpbie {

std::vector<double> fejer_nodes(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = std::cos(pi * double(2 * j + 1) / double(2 * n));
  }
  // Enforce exact antisymmetry; cos() rounding differs slightly between the halves.
  for (std::size_t j = 0; j < n / 2; ++j) {
    x[n - 1 - j] = -x[j];
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return x;
}

std::vector<double> fejer_weights(std::size_t n) {
  // Standard Fejér-1 weights: the cosine argument is 2*l*theta_j.
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = pi * double(2 * j + 1) / double(2 * n);
    double sum = 0.0;
    for (std::size_t l = 1; l <= n / 2; ++l) {
      sum += std::cos(2.0 * double(l) * theta) / (4.0 * double(l * l) - 1.0);
    }
    w[j] = 2.0 / double(n) * (1.0 - 2.0 * sum);
  }
  return w;
}

FejerRule::FejerRule(std::size_t n) : nodes(fejer_nodes(n)), weights(fejer_weights(n)) {}

double cheb_eval(std::size_t n, double x) {
  if (n == 0) return 1.0;
  double t0 = 1.0, t1 = x;
  for (std::size_t k = 1; k < n; ++k) {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

void cheb_values(double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = x;
  for (std::size_t k = 2; k < out.size(); ++k) {
    out[k] = 2.0 * x * out[k - 1] - out[k - 2];
  }
}

ChebCoeffGrid cheb_transform_2d(std::span<const cplx> nodal, std::size_t n_u, std::size_t n_v) {
  assert(nodal.size() == n_u * n_v);
  const auto xu = fejer_nodes(n_u);
  const auto xv = fejer_nodes(n_v);

  // T tables; at the Fejér nodes T_n(x_i) = cos(n theta_i) exactly.
  std::vector<double> tu(n_u * n_u), tv(n_v * n_v);
  for (std::size_t i = 0; i < n_u; ++i) cheb_values(xu[i], std::span(tu).subspan(i * n_u, n_u));
  for (std::size_t j = 0; j < n_v; ++j) cheb_values(xv[j], std::span(tv).subspan(j * n_v, n_v));

  // Stage 1: partial sums over i for each (n, j).
  std::vector<cplx> partial(n_u * n_v);
  for (std::size_t j = 0; j < n_v; ++j) {
    for (std::size_t n = 0; n < n_u; ++n) {
      cplx acc = 0.0;
      for (std::size_t i = 0; i < n_u; ++i) acc += nodal[i + n_u * j] * tu[i * n_u + n];
      partial[n + n_u * j] = acc;
    }
  }

  ChebCoeffGrid out(n_u, n_v);
  const double scale = 1.0 / double(n_u * n_v);
  for (std::size_t m = 0; m < n_v; ++m) {
    const double am = (m == 0) ? 1.0 : 2.0;
    for (std::size_t n = 0; n < n_u; ++n) {
      const double an = (n == 0) ? 1.0 : 2.0;
      cplx acc = 0.0;
      for (std::size_t j = 0; j < n_v; ++j) acc += partial[n + n_u * j] * tv[j * n_v + m];
      out(n, m) = an * am * scale * acc;
    }
  }
  return out;
}

namespace {

// Clenshaw for sum_k c[k*stride] T_k(x), k < count.
template <class Get>
cplx clenshaw(std::size_t count, double x, Get&& coeff) {
  cplx b1 = 0.0, b2 = 0.0;
  for (std::size_t k = count; k-- > 1;) {
    const cplx b0 = coeff(k) + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return (count == 0) ? cplx(0.0) : coeff(0) + x * b1 - b2;
}

}  // namespace

cplx cheb_eval_2d(const ChebCoeffGrid& coeffs, double u, double v) {
  const std::size_t nu = coeffs.n_u(), nv = coeffs.n_v();
  return clenshaw(nv, v, [&](std::size_t m) {
    return clenshaw(nu, u, [&](std::size_t n) { return coeffs(n, m); });
  });
}

}  // namespace rpbie
