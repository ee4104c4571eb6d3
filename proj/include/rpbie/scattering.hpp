#pragma once

// Sound-soft scattering pipeline: incident waves, the density solve, far- and
// near-field evaluation, and the unit-sphere validation harness.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rpbie/forward_operator.hpp"
#include "rpbie/geometry.hpp"
#include "rpbie/gmres.hpp"
#include "rpbie/kernel.hpp"
#include "rpbie/precompute.hpp"

namespace rpbie {

struct PlaneWave {
  Vec3 direction{0.0, 0.0, 1.0};
  cplx amplitude{1.0, 0.0};
};

/// exp(i k d . r); d must be a unit vector.
cplx incident_plane_wave(double k, const Vec3& d, const Vec3& r);

struct ScatteringProblem {
  PatchAtlas atlas;
  double k = 1.0;
  Formulation formulation = Formulation::CombinedField;
  PlaneWave incident;
  std::size_t n = 16;
  std::size_t n_beta = 80;
  double delta = kDefaultDelta;
  int p_sing = kDefaultSingularOrder;
  GmresParams gmres;

  KernelKind kind() const { return {formulation, k}; }
  WeightParams weight_params() const { return {n_beta, p_sing}; }
  double wavelength() const { return 2.0 * pi / k; }

  /// Throws ConfigError on inconsistent settings: combined field needs a
  /// closed surface, single layer an open one.
  void validate() const;
};

/// Right-hand side -u_inc at every node.
std::vector<cplx> incident_rhs(const ScatteringProblem& problem, const SurfaceDiscretization& disc);

/// Solves the discretized integral equation on prepared operator data.
/// Non-convergence is reported through report.converged, not thrown.
std::vector<cplx> solve(const ScatteringProblem& problem, const OperatorData& op, SolveReport& report);

struct SolveResult {
  OperatorData op;
  std::vector<cplx> phi;
  SolveReport report;
};

/// Discretize, precompute and solve.
SolveResult solve(const ScatteringProblem& problem);

struct FarField {
  std::vector<Vec3> directions;
  std::vector<cplx> values;

  double max_abs() const;
};

/// Unit directions on a colatitude/longitude grid: n_theta colatitudes
/// spanning [0, pi] inclusive, n_phi longitudes at 2 pi j / n_phi.
std::vector<Vec3> latlong_directions(std::size_t n_theta = 181, std::size_t n_phi = 360);

/// F(rhat) = int K_inf(rhat, y) phi(y) dsigma(y) with
///   single layer:   K_inf = exp(-i k rhat.y) / (4 pi)
///   combined field: K_inf = -i k (rhat.n_y + 1) exp(-i k rhat.y) / (4 pi)
FarField far_field(const SurfaceDiscretization& disc, const KernelKind& kind, std::span<const cplx> phi,
                   std::span<const Vec3> directions);

/// max_i |a_i - b_i| over two patterns on the same directions.
double far_field_max_difference(const FarField& a, const FarField& b);

/// Rectangular grid of evaluation points origin + a * axis_u + b * axis_v,
/// a and b uniform on [0, 1] with n_u and n_v samples.
struct GridSpec {
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 axis_u{1.0, 0.0, 0.0};
  Vec3 axis_v{0.0, 1.0, 0.0};
  std::size_t n_u = 2;
  std::size_t n_v = 2;

  std::vector<Vec3> points() const;
};

struct FieldSample {
  Vec3 point;
  cplx total{0.0, 0.0};  ///< u_inc + u_scat; zero when flagged
  bool too_close = false;
};

/// Total field at off-surface points. A point closer than delta * diameter
/// to the nodes of some patch is flagged and its value omitted.
std::vector<FieldSample> near_field(const ScatteringProblem& problem, const SurfaceDiscretization& disc,
                                    std::span<const cplx> phi, std::span<const Vec3> points);

struct SphereValidationParams {
  double k = 2.0 * pi;
  std::size_t n = 16;
  std::size_t n_beta = 80;
  int splits = 1;
  int l = 5;
  int m = 2;
  double delta = kDefaultDelta;
  int p_sing = kDefaultSingularOrder;
  bool single_layer = false;  ///< also check S on its own
};

struct SphereValidation {
  double combined_error = 0.0;  ///< max |A Y - lambda Y| / max |lambda Y|
  double single_error = -1.0;   ///< same for S, negative when not computed
  double max_exact = 0.0;
  std::size_t patches = 0;
  std::size_t unknowns = 0;
  double points_per_wavelength = 0.0;
  double time_precompute = 0.0;  ///< seconds, plan and weights for the combined kernel
  double time_apply = 0.0;       ///< seconds, one combined operator application
};

/// Applies the combined operator (and optionally S) to nodal Y_l^m on the
/// unit sphere and compares with the analytic eigenvalue relations.
SphereValidation validate_sphere(const SphereValidationParams& params);

/// N / (L / lambda) with L = sqrt(4 pi / M), the mean patch side of the unit sphere.
double sphere_points_per_wavelength(std::size_t n, std::size_t patches, double k);

struct ConvergenceCase {
  std::size_t n = 16;
  std::size_t n_beta = 80;
  int splits = 1;
};

struct ConvergenceRow {
  ConvergenceCase c;
  SphereValidation result;
};

std::vector<ConvergenceRow> convergence_study(double k, int l, int m, std::span<const ConvergenceCase> cases,
                                              double delta = kDefaultDelta, int p_sing = kDefaultSingularOrder);

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows);
void write_far_field_csv(std::ostream& out, const FarField& ff);
void write_near_field(std::ostream& out, std::span<const FieldSample> samples);

}  // namespace rpbie
