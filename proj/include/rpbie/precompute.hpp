#pragma once

// Near-field classification, closest-point projection and the kernel–Chebyshev
// moments
//
//   beta^q_{n,m,l} = int int K(r_l, x_q(s,t)) J_q(s,t) T_n(s) T_m(t) ds dt
//
// evaluated with the rectangular-polar rule: Fejér nodes of size n_beta mapped
// through singular_map centred at the projection of r_l onto patch q.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rpbie/geometry.hpp"
#include "rpbie/kernel.hpp"

namespace rpbie {

/// Default near-field threshold, in units of the source patch diameter.
inline constexpr double kDefaultDelta = 0.5;
/// Default grading order of the rectangular-polar map.
inline constexpr int kDefaultSingularOrder = 8;

struct NearTarget {
  std::uint32_t node = 0;
  double s = 0.0;          ///< projection onto the patch, Chebyshev variables
  double t = 0.0;
  double distance = 0.0;   ///< |r_node - x_q(s, t)|
  bool self = false;
};

struct NearFieldPlan {
  double delta = kDefaultDelta;
  bool projected = false;
  /// targets[q]: near set of patch q, ascending by node.
  std::vector<std::vector<NearTarget>> targets;

  /// Reverse index: for node l, the pairs (patch, slot) with targets[patch][slot].node == l,
  /// ascending by patch, stored in [node_begin[l], node_begin[l+1]).
  std::vector<std::size_t> node_begin;
  std::vector<std::uint32_t> node_patch;
  std::vector<std::uint32_t> node_slot;

  std::size_t num_pairs() const;
  void build_reverse_index(std::size_t num_nodes);
};

/// Self nodes always; other nodes when their distance to the nearest node of
/// the patch is below delta * diameter. The (s, t) fields hold the nearest
/// node's parameters and distance that node's distance, pending projection.
NearFieldPlan classify_near(const SurfaceDiscretization& disc, double delta);

struct Projection {
  double s = 0.0;
  double t = 0.0;
  double distance = 0.0;
};

/// Local minimiser of |r - x_q(w_u(s), w_v(t))| over [-1,1]^2 starting from
/// (s0, t0); golden-section coordinate descent with brackets of half-width
/// `bracket`, then a Newton polish on the stationarity conditions.
Projection project_point(const Patch& patch, const Vec3& r, double s0, double t0, double bracket);

/// As above, initialised from the best point of a coarse parameter grid.
Projection project_point(const Patch& patch, const Vec3& r);

/// Fills the projection of every non-self target in the plan.
void project_targets(NearFieldPlan& plan, const SurfaceDiscretization& disc);

/// classify_near followed by project_targets.
NearFieldPlan build_near_plan(const SurfaceDiscretization& disc, double delta);

struct MomentTarget {
  Vec3 point;
  double s = 0.0;  ///< singular point in Chebyshev variables
  double t = 0.0;
};

struct MomentParams {
  std::size_t n_u = 0;
  std::size_t n_v = 0;
  std::size_t n_beta = 0;
  int p_sing = kDefaultSingularOrder;
};

/// Moment grids for one patch. out receives targets.size() blocks of
/// n_u * n_v values, block b holding beta(n, m) at [b * n_u * n_v + n + n_u * m].
void compute_weights(const Patch& patch, std::span<const MomentTarget> targets, const KernelKind& kind,
                     const MomentParams& params, std::span<cplx> out);

class PrecomputedWeights {
 public:
  PrecomputedWeights() = default;
  PrecomputedWeights(std::size_t n_u, std::size_t n_v, const NearFieldPlan& plan);

  std::size_t n_u() const { return n_u_; }
  std::size_t n_v() const { return n_v_; }
  std::size_t block_size() const { return n_u_ * n_v_; }
  std::size_t num_patches() const { return patch_begin_.empty() ? 0 : patch_begin_.size() - 1; }
  std::size_t num_blocks(std::size_t q) const { return patch_begin_[q + 1] - patch_begin_[q]; }

  std::span<cplx> block(std::size_t q, std::size_t slot);
  std::span<const cplx> block(std::size_t q, std::size_t slot) const;
  std::span<cplx> patch_blocks(std::size_t q);

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }
  const std::vector<std::size_t>& patch_begin() const { return patch_begin_; }

  /// Rebuilds from raw arrays (used by the cache loader).
  static PrecomputedWeights from_raw(std::size_t n_u, std::size_t n_v, std::vector<std::size_t> patch_begin,
                                     std::vector<cplx> data);

 private:
  std::size_t n_u_ = 0;
  std::size_t n_v_ = 0;
  std::vector<std::size_t> patch_begin_;  ///< in blocks, size M+1
  std::vector<cplx> data_;
};

struct WeightParams {
  std::size_t n_beta = 0;
  int p_sing = kDefaultSingularOrder;
};

/// Moments for every (patch, near target) pair of the plan. Pairs are
/// independent and processed in parallel; the result does not depend on the
/// number of threads.
PrecomputedWeights precompute_weights(const SurfaceDiscretization& disc, const NearFieldPlan& plan,
                                      const KernelKind& kind, const WeightParams& params);

}  // namespace rpbie
