#include "rpbie/scattering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "rpbie/special_functions.hpp"

namespace rpbie {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

cplx incident_plane_wave(double k, const Vec3& d, const Vec3& r) {
  const double phase = k * d.dot(r);
  return {std::cos(phase), std::sin(phase)};
}

void ScatteringProblem::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("wavenumber must be positive");
  if (atlas.size() == 0) throw ConfigError("empty patch atlas");
  if (formulation == Formulation::CombinedField && !atlas.closed)
    throw ConfigError("the combined-field formulation requires a closed surface");
  if (formulation == Formulation::SingleLayer && atlas.closed)
    throw ConfigError("the single-layer formulation requires an open surface");
  if (n < 2) throw ConfigError("N must be at least 2");
  if (n_beta < n) throw ConfigError("Nbeta must be at least N");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (p_sing < 2) throw ConfigError("p-sing must be at least 2");
  if (std::abs(incident.direction.norm() - 1.0) > 1e-12) throw ConfigError("incidence direction must be a unit vector");
  if (!(gmres.tol > 0.0) || gmres.restart < 1) throw ConfigError("invalid GMRES parameters");
}

std::vector<cplx> incident_rhs(const ScatteringProblem& problem, const SurfaceDiscretization& disc) {
  std::vector<cplx> b(disc.num_nodes());
  for (std::size_t l = 0; l < b.size(); ++l)
    b[l] = -problem.incident.amplitude * incident_plane_wave(problem.k, problem.incident.direction, disc.points[l]);
  return b;
}

std::vector<cplx> solve(const ScatteringProblem& problem, const OperatorData& op, SolveReport& report) {
  problem.validate();
  const auto b = incident_rhs(problem, op.disc);
  // The first-kind single-layer equation is solved for the edge-resolved
  // unknown psi = (dw_u/ds)(dw_v/dt) phi, a diagonal right preconditioner:
  // near flagged edges phi grows without bound while psi stays smooth and of
  // unit size. The second-kind combined equation keeps phi, whose identity
  // term the scaling would destroy.
  const auto& disc = op.disc;
  std::vector<double> scale(disc.num_nodes(), 1.0);
  if (problem.formulation == Formulation::SingleLayer)
    for (std::size_t l = 0; l < scale.size(); ++l) scale[l] = disc.dwu[l] * disc.dwv[l];
  const LinearMap apply = [&op, &scale](std::span<const cplx> psi) {
    std::vector<cplx> phi(psi.size());
    for (std::size_t l = 0; l < phi.size(); ++l) phi[l] = psi[l] / scale[l];
    return apply_operator(op, phi);
  };
  std::vector<cplx> phi = gmres(apply, b, problem.gmres, report);
  for (std::size_t l = 0; l < phi.size(); ++l) phi[l] /= scale[l];
  return phi;
}

SolveResult solve(const ScatteringProblem& problem) {
  problem.validate();
  SolveResult result;
  result.op = prepare_operator(problem.atlas, problem.n, problem.kind(), problem.delta, problem.weight_params());
  result.phi = solve(problem, result.op, result.report);
  return result;
}

double FarField::max_abs() const {
  double m = 0.0;
  for (const cplx& v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<Vec3> latlong_directions(std::size_t n_theta, std::size_t n_phi) {
  if (n_theta < 2 || n_phi < 1) throw ConfigError("direction grid needs at least 2 colatitudes and 1 longitude");
  std::vector<Vec3> dirs;
  dirs.reserve(n_theta * n_phi);
  for (std::size_t i = 0; i < n_theta; ++i) {
    const double theta = pi * double(i) / double(n_theta - 1);
    for (std::size_t j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * pi * double(j) / double(n_phi);
      Vec3 d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
      dirs.push_back(d.normalized());
    }
  }
  return dirs;
}

FarField far_field(const SurfaceDiscretization& disc, const KernelKind& kind, std::span<const cplx> phi,
                   std::span<const Vec3> directions) {
  if (phi.size() != disc.num_nodes()) throw ConfigError("density length does not match the discretization");
  FarField ff;
  ff.directions.assign(directions.begin(), directions.end());
  ff.values.assign(directions.size(), cplx(0.0, 0.0));
  const std::size_t nn = disc.num_nodes();
  std::vector<cplx> strength(nn);
  for (std::size_t l = 0; l < nn; ++l) strength[l] = disc.weight[l] * phi[l] / (4.0 * pi);
  const double k = kind.k;
  const bool combined = kind.formulation == Formulation::CombinedField;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t d = 0; d < std::ptrdiff_t(directions.size()); ++d) {
    const Vec3& rhat = directions[std::size_t(d)];
    cplx sum(0.0, 0.0);
    for (std::size_t l = 0; l < nn; ++l) {
      const double ph = -k * rhat.dot(disc.points[l]);
      cplx term = strength[l] * cplx(std::cos(ph), std::sin(ph));
      if (combined) term *= cplx(0.0, -k * (rhat.dot(disc.normals[l]) + 1.0));
      sum += term;
    }
    ff.values[std::size_t(d)] = sum;
  }
  return ff;
}

double far_field_max_difference(const FarField& a, const FarField& b) {
  if (a.values.size() != b.values.size()) throw ConfigError("far-field patterns on different direction grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

std::vector<Vec3> GridSpec::points() const {
  std::vector<Vec3> pts;
  pts.reserve(n_u * n_v);
  for (std::size_t j = 0; j < n_v; ++j) {
    const double b = n_v > 1 ? double(j) / double(n_v - 1) : 0.0;
    for (std::size_t i = 0; i < n_u; ++i) {
      const double a = n_u > 1 ? double(i) / double(n_u - 1) : 0.0;
      pts.push_back(origin + a * axis_u + b * axis_v);
    }
  }
  return pts;
}

std::vector<FieldSample> near_field(const ScatteringProblem& problem, const SurfaceDiscretization& disc,
                                    std::span<const cplx> phi, std::span<const Vec3> points) {
  if (phi.size() != disc.num_nodes()) throw ConfigError("density length does not match the discretization");
  const KernelKind kind = problem.kind();
  const std::size_t npp = disc.nodes_per_patch();
  const std::size_t m = disc.num_patches();

  // Bounding spheres of the patch nodes for a quick standoff test.
  std::vector<Vec3> centre(m, Vec3::Zero());
  std::vector<double> radius(m, 0.0), standoff(m, 0.0);
  for (std::size_t q = 0; q < m; ++q) {
    const std::size_t off = disc.offset(q);
    for (std::size_t i = 0; i < npp; ++i) centre[q] += disc.points[off + i];
    centre[q] /= double(npp);
    for (std::size_t i = 0; i < npp; ++i) radius[q] = std::max(radius[q], (disc.points[off + i] - centre[q]).norm());
    standoff[q] = problem.delta * disc.atlas.patches[q].diameter();
  }

  std::vector<FieldSample> out(points.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t pi_ = 0; pi_ < std::ptrdiff_t(points.size()); ++pi_) {
    const Vec3& r = points[std::size_t(pi_)];
    FieldSample& sample = out[std::size_t(pi_)];
    sample.point = r;
    bool close = false;
    for (std::size_t q = 0; q < m && !close; ++q) {
      if ((r - centre[q]).norm() - radius[q] >= standoff[q]) continue;
      const std::size_t off = disc.offset(q);
      for (std::size_t i = 0; i < npp; ++i) {
        if ((r - disc.points[off + i]).norm() < standoff[q]) {
          close = true;
          break;
        }
      }
    }
    if (close) {
      sample.too_close = true;
      continue;
    }
    cplx scat(0.0, 0.0);
    for (std::size_t l = 0; l < disc.num_nodes(); ++l) {
      const Vec3 diff = r - disc.points[l];
      scat += kernel_from_diff(kind.formulation, kind.k, diff, diff.norm(), disc.normals[l]) * (disc.weight[l] * phi[l]);
    }
    sample.total =
        scat + problem.incident.amplitude * incident_plane_wave(problem.k, problem.incident.direction, r);
  }
  return out;
}

double sphere_points_per_wavelength(std::size_t n, std::size_t patches, double k) {
  const double side = std::sqrt(4.0 * pi / double(patches));
  return double(n) / (side / (2.0 * pi / k));
}

SphereValidation validate_sphere(const SphereValidationParams& p) {
  if (p.l < 0 || p.l > 20 || std::abs(p.m) > p.l) throw ConfigError("need 0 <= l <= 20 and |m| <= l");
  if (!(p.k > 0.0)) throw ConfigError("wavenumber must be positive");
  const PatchAtlas atlas = make_sphere_atlas(1.0, p.splits);
  const WeightParams wp{p.n_beta, p.p_sing};

  SphereValidation res;
  const auto t0 = std::chrono::steady_clock::now();
  const OperatorData op = prepare_operator(atlas, p.n, {Formulation::CombinedField, p.k}, p.delta, wp);
  res.time_precompute = seconds_since(t0);
  res.patches = atlas.size();
  res.unknowns = op.disc.num_nodes();
  res.points_per_wavelength = sphere_points_per_wavelength(p.n, atlas.size(), p.k);

  std::vector<cplx> y(op.disc.num_nodes());
  for (std::size_t l = 0; l < y.size(); ++l) y[l] = spherical_harmonic(p.l, p.m, op.disc.points[l]);

  auto relative_error = [&y](std::span<const cplx> computed, cplx eig, double& max_exact) {
    double err = 0.0;
    max_exact = 0.0;
    for (std::size_t l = 0; l < y.size(); ++l) {
      const cplx exact = eig * y[l];
      err = std::max(err, std::abs(computed[l] - exact));
      max_exact = std::max(max_exact, std::abs(exact));
    }
    return err / max_exact;
  };

  const auto t1 = std::chrono::steady_clock::now();
  const auto a_y = apply_operator(op, y);
  res.time_apply = seconds_since(t1);
  res.combined_error = relative_error(a_y, combined_field_eigenvalue(p.l, p.k), res.max_exact);

  if (p.single_layer) {
    const KernelKind sk{Formulation::SingleLayer, p.k};
    const PrecomputedWeights sw = precompute_weights(op.disc, op.plan, sk, wp);
    const auto s_y = apply_operator(sk, op.disc, op.plan, sw, y);
    double unused = 0.0;
    res.single_error = relative_error(s_y, single_layer_eigenvalue(p.l, p.k), unused);
  }
  return res;
}

std::vector<ConvergenceRow> convergence_study(double k, int l, int m, std::span<const ConvergenceCase> cases,
                                              double delta, int p_sing) {
  std::vector<ConvergenceRow> rows;
  for (const ConvergenceCase& c : cases) {
    SphereValidationParams p;
    p.k = k;
    p.n = c.n;
    p.n_beta = c.n_beta;
    p.splits = c.splits;
    p.l = l;
    p.m = m;
    p.delta = delta;
    p.p_sing = p_sing;
    rows.push_back({c, validate_sphere(p)});
  }
  return rows;
}

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows) {
  out << "N,Nbeta,patches,points_per_lambda,unknowns,time_precompute_s,time_apply_s,error\n";
  const auto old = out.precision(10);
  for (const auto& r : rows) {
    out << r.c.n << ',' << r.c.n_beta << ',' << r.result.patches << ',' << r.result.points_per_wavelength << ','
        << r.result.unknowns << ',' << r.result.time_precompute << ',' << r.result.time_apply << ','
        << r.result.combined_error << '\n';
  }
  out.precision(old);
}

void write_far_field_csv(std::ostream& out, const FarField& ff) {
  out << "x,y,z,re,im,abs\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < ff.values.size(); ++i) {
    const Vec3& d = ff.directions[i];
    out << d.x() << ',' << d.y() << ',' << d.z() << ',' << ff.values[i].real() << ',' << ff.values[i].imag() << ','
        << std::abs(ff.values[i]) << '\n';
  }
  out.precision(old);
}

void write_near_field(std::ostream& out, std::span<const FieldSample> samples) {
  std::size_t flagged = 0;
  for (const auto& s : samples) flagged += s.too_close ? 1 : 0;
  out << "# total field samples: " << samples.size() << ", flagged: " << flagged << '\n';
  out << "# flag 1 marks points inside the standoff distance; their values are omitted\n";
  out << "# x y z re im abs2 flag\n";
  const auto old = out.precision(17);
  for (const auto& s : samples) {
    out << s.point.x() << ' ' << s.point.y() << ' ' << s.point.z() << ' ';
    if (s.too_close)
      out << "nan nan nan 1\n";
    else
      out << s.total.real() << ' ' << s.total.imag() << ' ' << std::norm(s.total) << " 0\n";
  }
  out.precision(old);
}

}  // namespace rpbie
