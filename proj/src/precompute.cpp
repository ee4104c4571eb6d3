#include "rpbie/precompute.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <omp.h>

#include "rpbie/kernel_sums.hpp"

namespace rpbie {

std::size_t NearFieldPlan::num_pairs() const {
  std::size_t n = 0;
  for (const auto& t : targets) n += t.size();
  return n;
}

void NearFieldPlan::build_reverse_index(std::size_t num_nodes) {
  node_begin.assign(num_nodes + 1, 0);
  for (const auto& list : targets)
    for (const NearTarget& nt : list) ++node_begin[nt.node + 1];
  for (std::size_t l = 0; l < num_nodes; ++l) node_begin[l + 1] += node_begin[l];
  node_patch.resize(node_begin.back());
  node_slot.resize(node_begin.back());
  std::vector<std::size_t> fill(node_begin.begin(), node_begin.end() - 1);
  for (std::size_t q = 0; q < targets.size(); ++q) {
    for (std::size_t slot = 0; slot < targets[q].size(); ++slot) {
      const std::size_t pos = fill[targets[q][slot].node]++;
      node_patch[pos] = std::uint32_t(q);
      node_slot[pos] = std::uint32_t(slot);
    }
  }
}

NearFieldPlan classify_near(const SurfaceDiscretization& disc, double delta) {
  if (!(delta > 0.0)) throw ConfigError("near-field threshold delta must be positive");
  NearFieldPlan plan;
  plan.delta = delta;
  const std::size_t npp = disc.nodes_per_patch();
  const std::size_t total = disc.num_nodes();
  plan.targets.resize(disc.num_patches());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t q = 0; q < disc.num_patches(); ++q) {
    const std::size_t begin = disc.offset(q), end = begin + npp;
    Vec3 centre = Vec3::Zero();
    for (std::size_t l = begin; l < end; ++l) centre += disc.points[l];
    centre /= double(npp);
    double radius = 0.0;
    for (std::size_t l = begin; l < end; ++l) radius = std::max(radius, (disc.points[l] - centre).norm());
    const double threshold = delta * disc.atlas.patches[q].diameter();

    auto& list = plan.targets[q];
    for (std::size_t l = 0; l < total; ++l) {
      if (l >= begin && l < end) {
        list.push_back({std::uint32_t(l), disc.s[l], disc.t[l], 0.0, true});
        continue;
      }
      const Vec3& r = disc.points[l];
      if ((r - centre).norm() - radius >= threshold) continue;
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = begin;
      for (std::size_t m = begin; m < end; ++m) {
        const double d = (r - disc.points[m]).squaredNorm();
        if (d < best) {
          best = d;
          arg = m;
        }
      }
      best = std::sqrt(best);
      if (best < threshold) list.push_back({std::uint32_t(l), disc.s[arg], disc.t[arg], best, false});
    }
  }
  plan.build_reverse_index(total);
  return plan;
}

namespace {

constexpr double kGolden = 0.6180339887498949;

double sq_dist(const Patch& patch, const Vec3& r, double s, double t) {
  return (patch.point_at(s, t) - r).squaredNorm();
}

template <class F>
double golden_section(F&& f, double lo, double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
    }
  }
  // The end points may beat the interior probes when the minimum is on the boundary.
  double x = 0.5 * (a + b), fx = f(x);
  for (double e : {lo, hi}) {
    if (e == a || e == b) {
      const double fe = f(e);
      if (fe < fx) {
        x = e;
        fx = fe;
      }
    }
  }
  return x;
}

// Golden-section line search in one coordinate; the bracket is moved when the
// minimiser sits on an interior bracket end.
template <class F>
double line_min(F&& f, double x0, double half) {
  constexpr double kTol = 1e-7;
  double centre = x0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    const double lo = std::max(-1.0, centre - half), hi = std::min(1.0, centre + half);
    const double x = golden_section(f, lo, hi, kTol);
    const bool stuck_lo = (x - lo < 2 * kTol) && lo > -1.0;
    const bool stuck_hi = (hi - x < 2 * kTol) && hi < 1.0;
    if (!stuck_lo && !stuck_hi) return x;
    centre = x;
    half *= 2.0;
  }
  return centre;
}

struct Gradient {
  double gs, gt;
};

Gradient dist_gradient(const Patch& patch, const Vec3& r, double u, double v) {
  const SurfacePoint sp = patch.eval(u, v);
  const Vec3 diff = sp.x - r;
  return {diff.dot(sp.xu), diff.dot(sp.xv)};
}

// Newton iterations on the stationarity conditions of |x - r|^2 / 2 in the
// patch's own parameters (u, v), where the problem stays well conditioned up
// to the edges; bound constraints are handled by freezing coordinates pushed
// against the box.
void newton_polish(const Patch& patch, const Vec3& r, double& u, double& v) {
  constexpr double kStep = 1e-6;
  for (int iter = 0; iter < 30; ++iter) {
    const Gradient g = dist_gradient(patch, r, u, v);
    const bool fix_u = (u <= -1.0 && g.gs > 0.0) || (u >= 1.0 && g.gs < 0.0);
    const bool fix_v = (v <= -1.0 && g.gt > 0.0) || (v >= 1.0 && g.gt < 0.0);
    if (fix_u && fix_v) return;

    // Hessian columns by differencing the analytic gradient.
    const double hu = (u + kStep <= 1.0) ? kStep : -kStep;
    const double hv = (v + kStep <= 1.0) ? kStep : -kStep;
    const Gradient gu = dist_gradient(patch, r, u + hu, v);
    const Gradient gv = dist_gradient(patch, r, u, v + hv);
    const double huu = (gu.gs - g.gs) / hu, huv = 0.5 * ((gu.gt - g.gt) / hu + (gv.gs - g.gs) / hv);
    const double hvv = (gv.gt - g.gt) / hv;

    double du = 0.0, dv = 0.0;
    if (fix_u) {
      if (!(hvv > 0.0)) return;
      dv = -g.gt / hvv;
    } else if (fix_v) {
      if (!(huu > 0.0)) return;
      du = -g.gs / huu;
    } else {
      const double det = huu * hvv - huv * huv;
      if (!(huu > 0.0) || !(det > 0.0)) return;
      du = -(hvv * g.gs - huv * g.gt) / det;
      dv = -(huu * g.gt - huv * g.gs) / det;
    }
    const double nu = std::clamp(u + du, -1.0, 1.0), nv = std::clamp(v + dv, -1.0, 1.0);
    const Gradient gn = dist_gradient(patch, r, nu, nv);
    auto free_norm = [](const Gradient& gr, double uu, double vv) {
      const double a = ((uu <= -1.0 && gr.gs > 0.0) || (uu >= 1.0 && gr.gs < 0.0)) ? 0.0 : gr.gs;
      const double b = ((vv <= -1.0 && gr.gt > 0.0) || (vv >= 1.0 && gr.gt < 0.0)) ? 0.0 : gr.gt;
      return std::hypot(a, b);
    };
    if (free_norm(gn, nu, nv) > free_norm(g, u, v)) return;
    const double moved = std::abs(nu - u) + std::abs(nv - v);
    u = nu;
    v = nv;
    if (moved < 1e-15) return;
  }
}

}  // namespace

Projection project_point(const Patch& patch, const Vec3& r, double s0, double t0, double bracket) {
  double s = std::clamp(s0, -1.0, 1.0), t = std::clamp(t0, -1.0, 1.0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double s_old = s, t_old = t;
    s = line_min([&](double x) { return sq_dist(patch, r, x, t); }, s, bracket);
    t = line_min([&](double x) { return sq_dist(patch, r, s, x); }, t, bracket);
    if (std::abs(s - s_old) + std::abs(t - t_old) < 1e-6) break;
  }
  double u = edge_map(patch.flag_u(), patch.cov_order(), s).value;
  double v = edge_map(patch.flag_v(), patch.cov_order(), t).value;
  newton_polish(patch, r, u, v);
  s = edge_map_inverse(patch.flag_u(), patch.cov_order(), u);
  t = edge_map_inverse(patch.flag_v(), patch.cov_order(), v);
  return {s, t, (patch.eval(u, v).x - r).norm()};
}

Projection project_point(const Patch& patch, const Vec3& r) {
  constexpr int kGrid = 17;
  double best = std::numeric_limits<double>::infinity(), bs = 0.0, bt = 0.0;
  for (int j = 0; j < kGrid; ++j) {
    for (int i = 0; i < kGrid; ++i) {
      const double s = -1.0 + 2.0 * i / (kGrid - 1), t = -1.0 + 2.0 * j / (kGrid - 1);
      const double d = sq_dist(patch, r, s, t);
      if (d < best) {
        best = d;
        bs = s;
        bt = t;
      }
    }
  }
  return project_point(patch, r, bs, bt, 2.0 / (kGrid - 1));
}

void project_targets(NearFieldPlan& plan, const SurfaceDiscretization& disc) {
  // Twice the widest Fejér gap brackets the neighbours of the nearest node.
  const double bracket = 2.0 * std::max(pi / double(disc.n_u), pi / double(disc.n_v));
  for (std::size_t q = 0; q < plan.targets.size(); ++q) {
    auto& list = plan.targets[q];
    const Patch& patch = disc.atlas.patches[q];
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t k = 0; k < list.size(); ++k) {
      NearTarget& nt = list[k];
      if (nt.self) continue;
      const Projection pr = project_point(patch, disc.points[nt.node], nt.s, nt.t, bracket);
      nt.s = pr.s;
      nt.t = pr.t;
      nt.distance = pr.distance;
    }
  }
  plan.projected = true;
}

NearFieldPlan build_near_plan(const SurfaceDiscretization& disc, double delta) {
  NearFieldPlan plan = classify_near(disc, delta);
  project_targets(plan, disc);
  return plan;
}

namespace {

/// Below this parameter offset from the singular point, x - x0 is obtained by
/// integrating the tangent vectors along the segment instead of subtracting
/// two evaluated points. The subtraction carries an absolute error of a few
/// ulps of |x|, which the double-layer numerator (x0 - x) . n ~ |x - x0|^2
/// cannot tolerate at the tiny offsets produced by the graded singular map.
constexpr double kSegmentOffset = 0.02;

/// Nodes closer than this (in patch parameters) to the singular point are dropped.
constexpr double kRoundingOffset = 1e-14;

using SegmentRule = boost::math::quadrature::gauss<double, 5>;

/// x(u, v) - x(u0, v0) as the integral of x_u du + x_v dv along the segment.
Vec3 segment_difference(const Patch& patch, double u0, double v0, double du, double dv) {
  const auto& nodes = SegmentRule::abscissa();
  const auto& weights = SegmentRule::weights();
  Vec3 acc = Vec3::Zero();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (const double sign : {-1.0, 1.0}) {
      if (nodes[k] == 0.0 && sign > 0.0) continue;
      const double s = 0.5 * (1.0 + sign * nodes[k]);
      const SurfacePoint sp = patch.eval(u0 + s * du, v0 + s * dv);
      acc += weights[k] * (sp.xu * du + sp.xv * dv);
    }
  }
  return 0.5 * acc;
}

struct MomentScratch {
  Eigen::MatrixXd tu, tv, gr, gi, hr, hi;
  std::vector<double> dx, dy, dz, nx, ny, nz, jac;
  std::vector<SurfacePoint> grid;
  std::vector<double> uu, vv, cheb;
  std::vector<MapValue> mu, mv;
  std::vector<char> zu, zv;
};

void fill_axis(const FejerRule& rule, double alpha, int p_sing, EdgeFlag flag, int p_edge, std::size_t n_cheb,
               Eigen::MatrixXd& tmat, std::vector<double>& mapped, std::vector<char>& zero,
               std::vector<double>& cheb) {
  const std::size_t nb = rule.size();
  tmat.resize(Eigen::Index(n_cheb), Eigen::Index(nb));
  mapped.resize(nb);
  zero.resize(nb);
  cheb.resize(n_cheb);
  for (std::size_t i = 0; i < nb; ++i) {
    const MapValue m = singular_map(alpha, p_sing, rule.nodes[i]);
    const double wgt = m.deriv * rule.weights[i];
    cheb_values(m.value, cheb);
    for (std::size_t n = 0; n < n_cheb; ++n) tmat(Eigen::Index(n), Eigen::Index(i)) = cheb[n] * wgt;
    mapped[i] = edge_map(flag, p_edge, m.value).value;
    zero[i] = (wgt == 0.0);
  }
}

void moment_block(const Patch& patch, const MomentTarget& target, const KernelKind& kind, const FejerRule& rule,
                  const MomentParams& params, MomentScratch& w, std::span<cplx> out) {
  const std::size_t nb = rule.size();
  fill_axis(rule, target.s, params.p_sing, patch.flag_u(), patch.cov_order(), params.n_u, w.tu, w.uu, w.zu, w.cheb);
  fill_axis(rule, target.t, params.p_sing, patch.flag_v(), patch.cov_order(), params.n_v, w.tv, w.vv, w.zv, w.cheb);

  // Singular point in patch parameters and the target's offset from it
  // (exactly zero for self targets).
  const double u0 = edge_map(patch.flag_u(), patch.cov_order(), target.s).value;
  const double v0 = edge_map(patch.flag_v(), patch.cov_order(), target.t).value;
  const Vec3 offset = target.point - patch.eval(u0, v0).x;

  // Geometry pass; the kernel itself is evaluated in one vectorized sweep.
  const std::size_t npts = nb * nb;
  for (auto* a : {&w.dx, &w.dy, &w.dz, &w.nx, &w.ny, &w.nz, &w.jac}) a->resize(npts);
  w.grid.resize(npts);
  patch.eval_grid(w.uu, w.vv, w.grid);
  for (std::size_t j = 0; j < nb; ++j) {
    for (std::size_t i = 0; i < nb; ++i) {
      const std::size_t idx = i + nb * j;
      const double du = w.uu[i] - u0;
      const double dv = w.vv[j] - v0;
      // Zero-weight nodes, and nodes whose graded offset is at rounding level
      // (negligible weight, position no longer resolvable), contribute nothing.
      if (w.zu[i] || w.zv[j] || std::max(std::abs(du), std::abs(dv)) < kRoundingOffset) {
        w.dx[idx] = 1.0;
        w.dy[idx] = w.dz[idx] = 0.0;
        w.nx[idx] = w.ny[idx] = w.nz[idx] = 0.0;
        w.jac[idx] = 0.0;
        continue;
      }
      const SurfacePoint& sp = w.grid[idx];
      const Vec3 c = sp.xu.cross(sp.xv);
      const double jac = c.norm();
      const Vec3 diff = (std::abs(du) < kSegmentOffset && std::abs(dv) < kSegmentOffset)
                            ? Vec3(offset - segment_difference(patch, u0, v0, du, dv))
                            : Vec3(target.point - sp.x);
      if (diff.squaredNorm() == 0.0) {
        std::ostringstream msg;
        msg << "moment quadrature node coincides with its target on patch " << patch.id << " (target s="
            << target.s << ", t=" << target.t << ")";
        throw NumericalError(msg.str());
      }
      const Vec3 n = c / jac;
      w.dx[idx] = diff.x();
      w.dy[idx] = diff.y();
      w.dz[idx] = diff.z();
      w.nx[idx] = n.x();
      w.ny[idx] = n.y();
      w.nz[idx] = n.z();
      w.jac[idx] = jac;
    }
  }
  w.gr.resize(Eigen::Index(nb), Eigen::Index(nb));
  w.gi.resize(Eigen::Index(nb), Eigen::Index(nb));
  kernel_values(kind.formulation, kind.k, npts, {w.dx.data(), w.dy.data(), w.dz.data()},
                {w.nx.data(), w.ny.data(), w.nz.data()}, w.jac.data(), w.gr.data(), w.gi.data());
  w.hr.noalias() = w.tu * w.gr;
  w.hi.noalias() = w.tu * w.gi;
  const Eigen::MatrixXd br = w.hr * w.tv.transpose();
  const Eigen::MatrixXd bi = w.hi * w.tv.transpose();
  for (std::size_t m = 0; m < params.n_v; ++m)
    for (std::size_t n = 0; n < params.n_u; ++n)
      out[n + params.n_u * m] = cplx(br(Eigen::Index(n), Eigen::Index(m)), bi(Eigen::Index(n), Eigen::Index(m)));
}

}  // namespace

void compute_weights(const Patch& patch, std::span<const MomentTarget> targets, const KernelKind& kind,
                     const MomentParams& params, std::span<cplx> out) {
  if (params.n_beta < 1) throw ConfigError("n_beta must be positive");
  const std::size_t block = params.n_u * params.n_v;
  if (out.size() != targets.size() * block) throw ConfigError("moment output has the wrong size");
  const FejerRule rule(params.n_beta);
  MomentScratch scratch;
  for (std::size_t b = 0; b < targets.size(); ++b) {
    moment_block(patch, targets[b], kind, rule, params, scratch, out.subspan(b * block, block));
  }
}

PrecomputedWeights::PrecomputedWeights(std::size_t n_u, std::size_t n_v, const NearFieldPlan& plan)
    : n_u_(n_u), n_v_(n_v) {
  patch_begin_.assign(plan.targets.size() + 1, 0);
  for (std::size_t q = 0; q < plan.targets.size(); ++q) patch_begin_[q + 1] = patch_begin_[q] + plan.targets[q].size();
  data_.assign(patch_begin_.back() * block_size(), cplx(0.0));
}

std::span<cplx> PrecomputedWeights::block(std::size_t q, std::size_t slot) {
  return std::span(data_).subspan((patch_begin_[q] + slot) * block_size(), block_size());
}

std::span<const cplx> PrecomputedWeights::block(std::size_t q, std::size_t slot) const {
  return std::span(data_).subspan((patch_begin_[q] + slot) * block_size(), block_size());
}

std::span<cplx> PrecomputedWeights::patch_blocks(std::size_t q) {
  return std::span(data_).subspan(patch_begin_[q] * block_size(), num_blocks(q) * block_size());
}

PrecomputedWeights PrecomputedWeights::from_raw(std::size_t n_u, std::size_t n_v, std::vector<std::size_t> patch_begin,
                                                std::vector<cplx> data) {
  PrecomputedWeights w;
  w.n_u_ = n_u;
  w.n_v_ = n_v;
  w.patch_begin_ = std::move(patch_begin);
  w.data_ = std::move(data);
  if (w.patch_begin_.empty() || w.data_.size() != w.patch_begin_.back() * w.block_size()) {
    throw ConfigError("inconsistent weight arrays");
  }
  return w;
}

PrecomputedWeights precompute_weights(const SurfaceDiscretization& disc, const NearFieldPlan& plan,
                                      const KernelKind& kind, const WeightParams& params) {
  if (!plan.projected) throw ConfigError("near-field plan must be projected before precomputation");
  if (params.n_beta < std::max(disc.n_u, disc.n_v)) {
    throw ConfigError("n_beta must be at least the number of nodes per direction");
  }
  PrecomputedWeights weights(disc.n_u, disc.n_v, plan);
  const MomentParams mp{disc.n_u, disc.n_v, params.n_beta, params.p_sing};
  const FejerRule rule(params.n_beta);

  // Flattened (patch, slot) pairs; each writes its own block.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(plan.num_pairs());
  for (std::size_t q = 0; q < plan.targets.size(); ++q)
    for (std::size_t slot = 0; slot < plan.targets[q].size(); ++slot) pairs.emplace_back(q, slot);

  std::exception_ptr failure;
#pragma omp parallel
  {
    MomentScratch scratch;
#pragma omp for schedule(dynamic, 8)
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [q, slot] = pairs[k];
      const NearTarget& nt = plan.targets[q][slot];
      const MomentTarget target{disc.points[nt.node], nt.s, nt.t};
      try {
        moment_block(disc.atlas.patches[q], target, kind, rule, mp, scratch, weights.block(q, slot));
      } catch (...) {
#pragma omp critical(rpbie_precompute_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return weights;
}

}  // namespace rpbie
