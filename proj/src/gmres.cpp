#include "rpbie/gmres.hpp"

#include <chrono>
#include <cmath>

namespace rpbie {

namespace {

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm(std::span<const cplx> a) {
  double s = 0.0;
  for (const cplx& x : a) s += std::norm(x);
  return std::sqrt(s);
}

std::vector<cplx> checked_apply(const LinearMap& apply, std::span<const cplx> x) {
  std::vector<cplx> y = apply(x);
  if (y.size() != x.size()) throw NumericalError("operator returned a vector of the wrong size");
  for (const cplx& v : y) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("operator produced NaN/Inf");
  }
  return y;
}

// Complex Givens rotation zeroing b in (a, b).
void make_givens(cplx a, cplx b, double& c, cplx& s) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
  } else {
    const double r = std::hypot(na, nb);
    c = na / r;
    s = (a / na) * std::conj(b) / r;
  }
}

}  // namespace

std::vector<cplx> gmres(const LinearMap& apply, std::span<const cplx> b, const GmresParams& params,
                        SolveReport& report) {
  if (!(params.tol > 0.0) || params.restart < 1) throw ConfigError("GMRES needs tol > 0 and restart >= 1");
  const auto start = std::chrono::steady_clock::now();
  report = SolveReport{};
  const std::size_t n = b.size();
  std::vector<cplx> x(n, cplx(0.0));
  const double bnorm = norm(b);
  auto finish = [&](double rel) {
    report.final_residual = rel;
    report.converged = rel <= params.tol;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  if (bnorm == 0.0) {
    finish(0.0);
    return x;
  }

  const std::size_t m = params.restart;
  std::vector<std::vector<cplx>> basis;
  std::vector<cplx> h((m + 1) * m);  // column-major Hessenberg, h[i + (m+1) j]
  std::vector<double> cs(m);
  std::vector<cplx> sn(m), g(m + 1);

  std::vector<cplx> r(b.begin(), b.end());
  double rnorm = bnorm;
  while (report.iterations < params.maxiter) {
    basis.assign(1, std::vector<cplx>(n));
    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / rnorm;
    std::fill(g.begin(), g.end(), cplx(0.0));
    g[0] = rnorm;

    std::size_t j = 0;
    bool stop = false;
    for (; j < m && report.iterations < params.maxiter; ++j) {
      std::vector<cplx> w = checked_apply(apply, basis[j]);
      ++report.iterations;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i <= j; ++i) {
          const cplx c = dot(basis[i], w);
          h[i + (m + 1) * j] += c;
          for (std::size_t k = 0; k < n; ++k) w[k] -= c * basis[i][k];
        }
      }
      const double wn = norm(w);
      h[j + 1 + (m + 1) * j] = wn;

      for (std::size_t i = 0; i < j; ++i) {
        const cplx a = h[i + (m + 1) * j], bb = h[i + 1 + (m + 1) * j];
        h[i + (m + 1) * j] = cs[i] * a + sn[i] * bb;
        h[i + 1 + (m + 1) * j] = -std::conj(sn[i]) * a + cs[i] * bb;
      }
      make_givens(h[j + (m + 1) * j], h[j + 1 + (m + 1) * j], cs[j], sn[j]);
      const cplx a = h[j + (m + 1) * j], bb = h[j + 1 + (m + 1) * j];
      h[j + (m + 1) * j] = cs[j] * a + sn[j] * bb;
      h[j + 1 + (m + 1) * j] = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];

      const double rel = std::abs(g[j + 1]) / bnorm;
      report.residual_history.push_back(rel);

      if (wn <= 1e-14 * std::abs(h[j + (m + 1) * j])) {
        report.breakdown = true;
        ++j;
        stop = true;
        break;
      }
      basis.emplace_back(n);
      for (std::size_t k = 0; k < n; ++k) basis[j + 1][k] = w[k] / wn;
      if (rel <= params.tol) {
        ++j;
        stop = true;
        break;
      }
    }

    // Orthogonality diagnostic over the basis of this cycle.
    for (std::size_t a = 0; a < basis.size(); ++a) {
      for (std::size_t c = a; c < basis.size(); ++c) {
        const double e = std::abs(dot(basis[a], basis[c]) - (a == c ? cplx(1.0) : cplx(0.0)));
        report.max_orthogonality_loss = std::max(report.max_orthogonality_loss, e);
      }
    }

    // Back substitution for y, then x += V y.
    std::vector<cplx> y(j);
    for (std::size_t i = j; i-- > 0;) {
      cplx s = g[i];
      for (std::size_t k = i + 1; k < j; ++k) s -= h[i + (m + 1) * k] * y[k];
      y[i] = s / h[i + (m + 1) * i];
    }
    for (std::size_t i = 0; i < j; ++i)
      for (std::size_t k = 0; k < n; ++k) x[k] += y[i] * basis[i][k];
    std::fill(h.begin(), h.end(), cplx(0.0));

    const std::vector<cplx> ax = checked_apply(apply, x);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ax[k];
    rnorm = norm(r);
    const double rel = rnorm / bnorm;
    if (stop || rel <= params.tol) {
      finish(rel);
      return x;
    }
    if (rnorm == 0.0) break;
  }
  finish(rnorm / bnorm);
  return x;
}

}  // namespace rpbie
