#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rpbie/quadrature.hpp"

using namespace rpbie;

TEST_CASE("fejer nodes: small rules and symmetry") {
  CHECK(fejer_nodes(1)[0] == 0.0);
  const auto two = fejer_nodes(2);
  CHECK(two[0] == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(-std::sqrt(2.0) / 2).epsilon(1e-15));
  for (std::size_t n = 1; n <= 40; ++n) {
    const auto x = fejer_nodes(n);
    REQUIRE(x.size() == n);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(x[j] + x[n - 1 - j]) <= 1e-15);
      CHECK(std::abs(x[j]) < 1.0);
      if (j > 0) CHECK(x[j] < x[j - 1]);
    }
  }
}

TEST_CASE("fejer weights: positive, sum to two") {
  CHECK(fejer_weights(1)[0] == doctest::Approx(2.0).epsilon(1e-15));
  for (std::size_t n = 1; n <= 64; ++n) {
    const auto w = fejer_weights(n);
    double sum = 0.0;
    for (double wj : w) {
      CHECK(wj > 0.0);
      sum += wj;
    }
    CHECK(std::abs(sum - 2.0) < 1e-14);
  }
}

TEST_CASE("fejer rule integrates monomials of degree below n") {
  for (std::size_t n = 1; n <= 30; ++n) {
    const FejerRule rule(n);
    for (std::size_t d = 0; d < n; ++d) {
      double q = 0.0;
      for (std::size_t j = 0; j < n; ++j) q += rule.weights[j] * std::pow(rule.nodes[j], double(d));
      const double exact = (d % 2 == 1) ? 0.0 : 2.0 / double(d + 1);
      CHECK_MESSAGE(std::abs(q - exact) < 1e-13, "n=" << n << " d=" << d);
    }
  }
}

TEST_CASE("fejer rule: x^2 and e^x") {
  for (std::size_t n = 3; n <= 12; ++n) {
    const FejerRule rule(n);
    double q = 0.0;
    for (std::size_t j = 0; j < n; ++j) q += rule.weights[j] * rule.nodes[j] * rule.nodes[j];
    CHECK(std::abs(q - 2.0 / 3.0) < 1e-14);
  }
  const FejerRule rule(20);
  double q = 0.0;
  for (std::size_t j = 0; j < 20; ++j) q += rule.weights[j] * std::exp(rule.nodes[j]);
  CHECK(std::abs(q - (std::numbers::e - 1.0 / std::numbers::e)) < 1e-13);
}

TEST_CASE("cheb_eval") {
  CHECK(cheb_eval(0, 0.37) == 1.0);
  CHECK(cheb_eval(3, 0.5) == doctest::Approx(-1.0).epsilon(1e-15));
  for (std::size_t n = 0; n <= 60; ++n) {
    for (double theta : {0.1, 0.7, 1.3, 2.9}) {
      CHECK(std::abs(cheb_eval(n, std::cos(theta)) - std::cos(double(n) * theta)) < 1e-12);
    }
  }
  std::vector<double> vals(12);
  cheb_values(-0.3, vals);
  for (std::size_t n = 0; n < vals.size(); ++n) CHECK(vals[n] == cheb_eval(n, -0.3));
}

TEST_CASE("discrete orthogonality on the fejer grid") {
  for (std::size_t big_n : {5u, 16u, 23u}) {
    const auto x = fejer_nodes(big_n);
    for (std::size_t n = 0; n < big_n; ++n) {
      for (std::size_t m = 0; m < big_n; ++m) {
        double s = 0.0;
        for (double xi : x) s += cheb_eval(n, xi) * cheb_eval(m, xi);
        s /= double(big_n);
        const double expect = (n != m) ? 0.0 : (n == 0 ? 1.0 : 0.5);
        CHECK(std::abs(s - expect) < 1e-13);
      }
    }
  }
}

namespace {

std::vector<cplx> nodal_grid(std::size_t nu, std::size_t nv, auto&& f) {
  const auto xu = fejer_nodes(nu), xv = fejer_nodes(nv);
  std::vector<cplx> out(nu * nv);
  for (std::size_t j = 0; j < nv; ++j)
    for (std::size_t i = 0; i < nu; ++i) out[i + nu * j] = f(xu[i], xv[j]);
  return out;
}

}  // namespace

TEST_CASE("cheb_transform_2d: single mode and constant") {
  const auto g = nodal_grid(8, 7, [](double u, double v) { return cplx(cheb_eval(2, u) * cheb_eval(3, v)); });
  const ChebCoeffGrid a = cheb_transform_2d(g, 8, 7);
  for (std::size_t m = 0; m < 7; ++m) {
    for (std::size_t n = 0; n < 8; ++n) {
      const double expect = (n == 2 && m == 3) ? 1.0 : 0.0;
      CHECK(std::abs(a(n, m) - expect) < 1e-13);
    }
  }
  const auto one = nodal_grid(6, 6, [](double, double) { return cplx(1.0); });
  const ChebCoeffGrid b = cheb_transform_2d(one, 6, 6);
  CHECK(std::abs(b(0, 0) - 1.0) < 1e-14);
  for (std::size_t c = 1; c < 36; ++c) CHECK(std::abs(b.data()[c]) < 1e-14);
}

TEST_CASE("cheb_transform_2d roundtrip and linearity") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = d(gen), b = d(gen), c = d(gen), e = d(gen);
    auto f = [&](double u, double v) { return cplx(std::exp(a * u) * std::cos(b * v + c), std::sin(e * u * v)); };
    auto g = [&](double u, double v) { return cplx(1.0 / (2.0 + a * u + b * v), u * u * v); };
    const auto fg = nodal_grid(16, 16, f), gg = nodal_grid(16, 16, g);
    const ChebCoeffGrid af = cheb_transform_2d(fg, 16, 16);
    const auto xs = fejer_nodes(16);
    double err = 0.0;
    for (std::size_t j = 0; j < 16; ++j)
      for (std::size_t i = 0; i < 16; ++i) err = std::max(err, std::abs(cheb_eval_2d(af, xs[i], xs[j]) - fg[i + 16 * j]));
    CHECK(err < 1e-12);

    const cplx alpha(0.3, -1.2), beta(-2.0, 0.5);
    std::vector<cplx> mix(fg.size());
    for (std::size_t l = 0; l < mix.size(); ++l) mix[l] = alpha * fg[l] + beta * gg[l];
    const ChebCoeffGrid am = cheb_transform_2d(mix, 16, 16), ag = cheb_transform_2d(gg, 16, 16);
    for (std::size_t l = 0; l < mix.size(); ++l)
      CHECK(std::abs(am.data()[l] - (alpha * af.data()[l] + beta * ag.data()[l])) < 1e-14);
  }
}

TEST_CASE("cheb_eval_2d against the direct double sum") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ChebCoeffGrid a(9, 6);
  for (auto& c : a.data()) c = cplx(d(gen), d(gen));
  for (int trial = 0; trial < 20; ++trial) {
    const double u = d(gen), v = d(gen);
    cplx direct = 0.0;
    for (std::size_t m = 0; m < 6; ++m)
      for (std::size_t n = 0; n < 9; ++n) direct += a(n, m) * cheb_eval(n, u) * cheb_eval(m, v);
    CHECK(std::abs(cheb_eval_2d(a, u, v) - direct) < 1e-13);
  }
  ChebCoeffGrid c0(4, 4);
  c0(0, 0) = cplx(2.5, -1.0);
  CHECK(std::abs(cheb_eval_2d(c0, 0.3, -0.8) - cplx(2.5, -1.0)) < 1e-15);
  ChebCoeffGrid c1(4, 4);
  c1(1, 0) = 1.0;
  CHECK(std::abs(cheb_eval_2d(c1, -0.42, 0.9) - (-0.42)) < 1e-15);
}
