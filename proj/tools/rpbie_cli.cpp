// Command-line driver for the boundary-integral scattering solver.
//
// Exit codes: 0 success, 1 other failure, 2 configuration or parse error,
// 3 GMRES did not converge, 4 weight cache built for different parameters.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "rpbie/forward_operator.hpp"
#include "rpbie/geometry.hpp"
#include "rpbie/patch_file.hpp"
#include "rpbie/precompute.hpp"
#include "rpbie/scattering.hpp"
#include "rpbie/weight_cache.hpp"

namespace fs = std::filesystem;
using namespace rpbie;

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kNoConvergence = 3, kCacheMismatch = 4 };

struct Options {
  std::string geometry = "sphere";
  double k = 1.0;
  std::string formulation = "auto";
  std::size_t n = 16;
  std::size_t n_beta = 0;  // 0: 5 N
  double delta = kDefaultDelta;
  int p_edge = kDefaultEdgeOrder;
  int p_sing = kDefaultSingularOrder;
  int splits = 1;
  std::string cache_dir;
  std::string out;
  int threads = 0;
  bool deterministic = false;
  std::vector<double> incidence{0.0, 0.0, 1.0};
  double tol = 1e-10;
  std::size_t restart = 100;
  std::size_t maxiter = 1000;
  int ell = 5;
  int m = 2;
  bool single = false;
  std::string cases = "8:40:1,12:60:1,16:80:1";
  std::string plane = "xz";
  double extent = 4.0;
  double offset = 0.0;
  std::size_t resolution = 101;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PatchAtlas resolve_geometry(const Options& o) {
  PatchAtlas atlas;
  if (o.geometry == "sphere") return make_sphere_atlas(1.0, o.splits);
  if (o.geometry == "cube")
    atlas = make_cube_atlas(2.0, o.p_edge);
  else if (o.geometry == "disk")
    atlas = make_disk_atlas(1.0, o.p_edge);
  else
    atlas = load_patch_file(o.geometry);
  return o.splits > 1 ? split_atlas(atlas, o.splits) : atlas;
}

ScatteringProblem make_problem(const Options& o) {
  ScatteringProblem p;
  p.atlas = resolve_geometry(o);
  p.k = o.k;
  if (o.formulation == "auto")
    p.formulation = p.atlas.closed ? Formulation::CombinedField : Formulation::SingleLayer;
  else
    p.formulation = o.formulation == "single" ? Formulation::SingleLayer : Formulation::CombinedField;
  if (o.incidence.size() != 3) throw ConfigError("--incidence takes three components");
  const Vec3 d(o.incidence[0], o.incidence[1], o.incidence[2]);
  if (d.norm() == 0.0) throw ConfigError("--incidence must be nonzero");
  p.incident.direction = d.normalized();
  p.n = o.n;
  p.n_beta = o.n_beta == 0 ? 5 * o.n : o.n_beta;
  p.delta = o.delta;
  p.p_sing = o.p_sing;
  p.gmres = {o.tol, o.restart, o.maxiter};
  p.validate();
  return p;
}

fs::path cache_file(const Options& o) { return fs::path(o.cache_dir) / "weights.bin"; }

/// Loads the operator from the cache when one exists, otherwise computes it
/// and stores it when a cache directory was given.
OperatorData obtain_operator(const Options& o, const ScatteringProblem& p, bool force_compute) {
  OperatorData op;
  op.kind = p.kind();
  op.disc = discretize(p.atlas, p.n, p.n);
  const CacheKey key = make_cache_key(op.disc, op.kind, p.delta, p.weight_params());
  const bool use_cache = !o.cache_dir.empty();
  if (use_cache && !force_compute && fs::exists(cache_file(o))) {
    auto t0 = std::chrono::steady_clock::now();
    CachedOperator cached = cache_load(cache_file(o), key);
    op.plan = std::move(cached.plan);
    op.weights = std::move(cached.weights);
    std::cerr << "loaded weights from " << cache_file(o).string() << " in " << seconds_since(t0) << " s\n";
    return op;
  }
  auto t0 = std::chrono::steady_clock::now();
  op.plan = build_near_plan(op.disc, p.delta);
  op.weights = precompute_weights(op.disc, op.plan, op.kind, p.weight_params());
  std::cerr << "precomputed " << op.plan.num_pairs() << " near pairs in " << seconds_since(t0) << " s\n";
  if (use_cache) {
    fs::create_directories(o.cache_dir);
    cache_store(cache_file(o), key, op.plan, op.weights);
    std::cerr << "stored weights in " << cache_file(o).string() << '\n';
  }
  return op;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  return out;
}

void print_report(const SolveReport& r) {
  std::cout << "gmres: iterations " << r.iterations << ", relative residual " << r.final_residual << ", "
            << (r.converged ? "converged" : "NOT converged") << (r.breakdown ? " (breakdown)" : "") << ", "
            << r.wall_seconds << " s\n";
}

struct Solved {
  ScatteringProblem problem;
  OperatorData op;
  std::vector<cplx> phi;
  SolveReport report;
};

Solved run_solve(const Options& o) {
  Solved s;
  s.problem = make_problem(o);
  s.op = obtain_operator(o, s.problem, false);
  s.phi = solve(s.problem, s.op, s.report);
  print_report(s.report);
  return s;
}

int cmd_mesh(const Options& o) {
  const ScatteringProblem p = make_problem(o);
  const SurfaceDiscretization disc = discretize(p.atlas, p.n, p.n);
  const NearFieldPlan plan = classify_near(disc, p.delta);
  std::cout << "surface: " << (p.atlas.closed ? "closed" : "open") << '\n'
            << "patches: " << disc.num_patches() << '\n'
            << "nodes per patch: " << disc.nodes_per_patch() << '\n'
            << "unknowns: " << disc.num_nodes() << '\n'
            << "area: " << disc.area() << '\n'
            << "near pairs: " << plan.num_pairs() << '\n'
            << "weight storage (MB): " << double(plan.num_pairs() * disc.nodes_per_patch() * sizeof(cplx)) / 1e6
            << '\n';
  if (o.geometry == "sphere")
    std::cout << "points per wavelength: " << sphere_points_per_wavelength(p.n, disc.num_patches(), p.k) << '\n';
  return kOk;
}

int cmd_precompute(const Options& o) {
  if (o.cache_dir.empty()) throw ConfigError("precompute needs --cache-dir");
  const ScatteringProblem p = make_problem(o);
  obtain_operator(o, p, true);
  return kOk;
}

void write_solution(const std::string& path, const Solved& s) {
  auto out = open_output(path);
  out << "# node x y z re im\n";
  out.precision(17);
  for (std::size_t l = 0; l < s.phi.size(); ++l) {
    const Vec3& x = s.op.disc.points[l];
    out << l << ' ' << x.x() << ' ' << x.y() << ' ' << x.z() << ' ' << s.phi[l].real() << ' ' << s.phi[l].imag()
        << '\n';
  }
}

int cmd_solve(const Options& o) {
  const Solved s = run_solve(o);
  if (!o.out.empty()) write_solution(o.out, s);
  return s.report.converged ? kOk : kNoConvergence;
}

int cmd_farfield(const Options& o) {
  const Solved s = run_solve(o);
  if (!s.report.converged) return kNoConvergence;
  const auto dirs = latlong_directions();
  const FarField ff = far_field(s.op.disc, s.problem.kind(), s.phi, dirs);
  std::cout << "far field: max |F| = " << ff.max_abs() << " over " << dirs.size() << " directions\n";
  if (!o.out.empty()) {
    auto out = open_output(o.out);
    write_far_field_csv(out, ff);
  }
  return kOk;
}

int cmd_nearfield(const Options& o) {
  const Solved s = run_solve(o);
  if (!s.report.converged) return kNoConvergence;
  if (o.plane.size() != 2 || o.resolution < 2) throw ConfigError("--plane takes two of x, y, z; --resolution >= 2");
  auto axis = [](char c) -> Vec3 {
    switch (c) {
      case 'x': return Vec3::UnitX();
      case 'y': return Vec3::UnitY();
      case 'z': return Vec3::UnitZ();
      default: throw ConfigError("--plane takes two of x, y, z");
    }
  };
  const Vec3 a = axis(o.plane[0]);
  const Vec3 b = axis(o.plane[1]);
  if (a == b) throw ConfigError("--plane axes must differ");
  GridSpec grid;
  grid.axis_u = o.extent * a;
  grid.axis_v = o.extent * b;
  grid.origin = -0.5 * (grid.axis_u + grid.axis_v) + o.offset * a.cross(b);
  grid.n_u = grid.n_v = o.resolution;
  const auto pts = grid.points();
  const auto samples = near_field(s.problem, s.op.disc, s.phi, pts);
  std::size_t flagged = 0;
  for (const auto& smp : samples) flagged += smp.too_close ? 1 : 0;
  std::cout << "near field: " << samples.size() << " points, " << flagged << " inside the standoff distance\n";
  if (!o.out.empty()) {
    auto out = open_output(o.out);
    write_near_field(out, samples);
  }
  return kOk;
}

int cmd_validate(const Options& o) {
  SphereValidationParams p;
  p.k = o.k;
  p.n = o.n;
  p.n_beta = o.n_beta == 0 ? 5 * o.n : o.n_beta;
  p.splits = o.splits;
  p.l = o.ell;
  p.m = o.m;
  p.delta = o.delta;
  p.p_sing = o.p_sing;
  p.single_layer = o.single;
  const SphereValidation v = validate_sphere(p);
  std::cout << "patches " << v.patches << ", unknowns " << v.unknowns << ", points per wavelength "
            << v.points_per_wavelength << '\n'
            << "combined-field relative error " << v.combined_error << '\n';
  if (v.single_error >= 0.0) std::cout << "single-layer relative error " << v.single_error << '\n';
  std::cout << "precompute " << v.time_precompute << " s, apply " << v.time_apply << " s\n";
  return kOk;
}

std::vector<ConvergenceCase> parse_cases(const std::string& text) {
  std::vector<ConvergenceCase> cases;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    ConvergenceCase c;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> c.n >> c1 >> c.n_beta >> c2 >> c.splits) || c1 != ':' || c2 != ':')
      throw ConfigError("bad --cases entry '" + item + "', expected N:Nbeta:splits");
    cases.push_back(c);
  }
  if (cases.empty()) throw ConfigError("--cases is empty");
  return cases;
}

int cmd_convergence(const Options& o) {
  const auto cases = parse_cases(o.cases);
  const auto rows = convergence_study(o.k, o.ell, o.m, cases, o.delta, o.p_sing);
  if (o.out.empty()) {
    write_convergence_csv(std::cout, rows);
  } else {
    auto out = open_output(o.out);
    write_convergence_csv(out, rows);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rectangular-polar boundary-integral solver for sound-soft Helmholtz scattering"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file of key = value settings named like the long options");

  Options o;
  app.add_option("--geometry", o.geometry, "sphere, cube, disk or a patch file")->capture_default_str();
  app.add_option("--k", o.k, "wavenumber")->capture_default_str();
  app.add_option("--formulation", o.formulation, "combined, single or auto (by surface closure)")
      ->check(CLI::IsMember({"combined", "single", "auto"}))
      ->capture_default_str();
  app.add_option("--N", o.n, "Fejer nodes per patch direction")->check(CLI::Range(2, 4096))->capture_default_str();
  app.add_option("--Nbeta", o.n_beta, "rectangular-polar nodes per direction (0: 5 N)")->capture_default_str();
  app.add_option("--delta", o.delta, "near-field threshold in patch diameters")->capture_default_str();
  app.add_option("--p-edge", o.p_edge, "edge grading order for cube and disk (0: none)")->capture_default_str();
  app.add_option("--p-sing", o.p_sing, "grading order of the singular map")->capture_default_str();
  app.add_option("--splits", o.splits, "split every patch s x s")->check(CLI::Range(1, 64))->capture_default_str();
  app.add_option("--cache-dir", o.cache_dir, "directory of the weight cache");
  app.add_option("--out", o.out, "output file");
  app.add_option("--threads", o.threads, "worker threads (0: OpenMP default)")->capture_default_str();
  app.add_flag("--deterministic", o.deterministic, "fixed thread schedule");
  app.add_option("--incidence", o.incidence, "incidence direction x y z")->expected(3)->delimiter(',');
  app.add_option("--tol", o.tol, "GMRES relative residual")->capture_default_str();
  app.add_option("--restart", o.restart, "GMRES restart length")->capture_default_str();
  app.add_option("--maxiter", o.maxiter, "GMRES iteration cap")->capture_default_str();

  app.add_subcommand("mesh", "print discretization statistics");
  app.add_subcommand("precompute", "build the near plan and weights and store them in --cache-dir");
  app.add_subcommand("solve", "solve for the density; --out writes it");
  app.add_subcommand("farfield", "solve and write the far-field pattern on a 181 x 360 grid");
  auto* nearfield = app.add_subcommand("nearfield", "solve and sample the total field on a plane");
  nearfield->add_option("--plane", o.plane, "two axes spanning the plane, e.g. xz")->capture_default_str();
  nearfield->add_option("--extent", o.extent, "side of the square grid")->capture_default_str();
  nearfield->add_option("--offset", o.offset, "shift along the plane normal")->capture_default_str();
  nearfield->add_option("--resolution", o.resolution, "samples per side")->capture_default_str();
  auto* validate = app.add_subcommand("validate-sphere", "unit-sphere eigenfunction check of the forward map");
  validate->add_option("--ell", o.ell, "degree l")->capture_default_str();
  validate->add_option("--m", o.m, "order m")->capture_default_str();
  validate->add_flag("--single", o.single, "also check the single-layer operator");
  auto* convergence = app.add_subcommand("convergence", "sphere validation over a list of cases, as CSV");
  convergence->add_option("--ell", o.ell, "degree l")->capture_default_str();
  convergence->add_option("--m", o.m, "order m")->capture_default_str();
  convergence->add_option("--cases", o.cases, "comma separated N:Nbeta:splits")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (o.threads > 0) omp_set_num_threads(o.threads);
  if (o.deterministic) omp_set_schedule(omp_sched_static, 0);
  if (o.deterministic) omp_set_dynamic(0);

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "mesh") return cmd_mesh(o);
    if (name == "precompute") return cmd_precompute(o);
    if (name == "solve") return cmd_solve(o);
    if (name == "farfield") return cmd_farfield(o);
    if (name == "nearfield") return cmd_nearfield(o);
    if (name == "validate-sphere") return cmd_validate(o);
    if (name == "convergence") return cmd_convergence(o);
    return kConfig;
  } catch (const CacheMismatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCacheMismatch;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
