#pragma once

// Patch atlas describing the scatterer surface and its Fejér discretization.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rpbie/covmaps.hpp"
#include "rpbie/quadrature.hpp"
#include "rpbie/types.hpp"

namespace rpbie {

/// Point and first partials of a parametrization.
struct SurfacePoint {
  Vec3 x;
  Vec3 xu;
  Vec3 xv;
};

/// A smooth map of [-1,1]^2 into R^3. Implementations are immutable.
class SurfaceMap {
 public:
  virtual ~SurfaceMap() = default;
  virtual SurfacePoint eval(double u, double v) const = 0;
  /// Tensor grid evaluation, out[i + u.size() * j] = eval(u[i], v[j]).
  virtual void eval_grid(std::span<const double> u, std::span<const double> v, std::span<SurfacePoint> out) const;
};

/// Affine sub-box of [-1,1]^2, used to express split patches.
struct ParamBox {
  double u0 = -1.0, u1 = 1.0;
  double v0 = -1.0, v1 = 1.0;
};

/// Geometry of a patch at mapped parameters (u, v), with the edge change of
/// variables applied on top of the Chebyshev variables (s, t).
struct PatchSample {
  Vec3 x;
  Vec3 normal;
  double jacobian;  ///< |x_u x x_v| in the patch's own (u, v)
  double u, v;      ///< w_u(s), w_v(t)
  double dwu, dwv;  ///< w_u'(s), w_v'(t)
};

class Patch {
 public:
  Patch(std::shared_ptr<const SurfaceMap> map, EdgeFlag flag_u, EdgeFlag flag_v, int cov_order_p,
        ParamBox box = {});

  int id = 0;

  EdgeFlag flag_u() const { return flag_u_; }
  EdgeFlag flag_v() const { return flag_v_; }
  int cov_order() const { return p_; }
  const ParamBox& box() const { return box_; }
  const std::shared_ptr<const SurfaceMap>& map() const { return map_; }

  /// Map and partials with respect to the patch parameters (u, v) in [-1,1]^2.
  SurfacePoint eval(double u, double v) const;
  /// Tensor grid of eval, out[i + u.size() * j] = eval(u[i], v[j]).
  void eval_grid(std::span<const double> u, std::span<const double> v, std::span<SurfacePoint> out) const;

  /// Geometry at the Chebyshev variables (s, t), after the edge maps.
  PatchSample sample(double s, double t) const;

  /// Point only, at Chebyshev variables (s, t).
  Vec3 point_at(double s, double t) const;

  /// Images of the four parameter corners.
  std::array<Vec3, 4> corners() const;

  /// Largest distance between corner images.
  double diameter() const;

  Patch with_flags(EdgeFlag flag_u, EdgeFlag flag_v, int p) const;
  Patch sub_patch(const ParamBox& sub, EdgeFlag flag_u, EdgeFlag flag_v) const;

 private:
  std::shared_ptr<const SurfaceMap> map_;
  EdgeFlag flag_u_;
  EdgeFlag flag_v_;
  int p_;
  ParamBox box_;
};

struct PatchAtlas {
  std::vector<Patch> patches;
  bool closed = true;

  std::size_t size() const { return patches.size(); }
};

/// Default edge grading order.
inline constexpr int kDefaultEdgeOrder = 4;

/// Cube-mapped sphere: six face patches (equiangular gnomonic projection),
/// each split into splits x splits subpatches. No edge flags.
PatchAtlas make_sphere_atlas(double radius, int splits = 1);

/// Axis-aligned cube [-side/2, side/2]^3, one flat patch per face, every side
/// flagged as a geometric edge.
PatchAtlas make_cube_atlas(double side, int p_edge = kDefaultEdgeOrder);

/// Disk of the given radius in the z = 0 plane with normal +z: a central square
/// of half-width radius/2 and four sectors reaching the rim. Only the rim
/// sides are flagged.
PatchAtlas make_disk_atlas(double radius, int p_edge = kDefaultEdgeOrder);

/// Splits every patch into s x s affine subpatches. Edge flags survive only on
/// subpatch sides that lie on a flagged side of the original.
PatchAtlas split_atlas(const PatchAtlas& atlas, int s);

/// Replaces the edge grading order on every flagged patch; p = 0 removes the
/// edge maps entirely (identity change of variables).
PatchAtlas with_edge_order(const PatchAtlas& atlas, int p);

/// Fingerprint of an atlas (flags, orders and sampled geometry) for cache keys.
std::uint32_t atlas_fingerprint(const PatchAtlas& atlas);

/// Node data of a patchwise tensor Fejér grid. Node l of patch q has index
/// offset(q) + i + n_u * j, with (i, j) indexing the (s, t) Fejér nodes.
struct SurfaceDiscretization {
  PatchAtlas atlas;
  std::size_t n_u = 0;
  std::size_t n_v = 0;
  FejerRule rule_u;
  FejerRule rule_v;

  std::vector<double> s, t;        ///< Chebyshev variables of each node
  std::vector<double> u, v;        ///< mapped parameters
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<double> jacobian;    ///< area element in (u, v)
  std::vector<double> dwu, dwv;    ///< edge-map derivatives
  std::vector<double> weight;      ///< jacobian * dwu * dwv * fejer_u * fejer_v

  std::size_t num_patches() const { return atlas.size(); }
  std::size_t nodes_per_patch() const { return n_u * n_v; }
  std::size_t num_nodes() const { return points.size(); }
  std::size_t offset(std::size_t q) const { return q * nodes_per_patch(); }
  std::size_t patch_of(std::size_t node) const { return node / nodes_per_patch(); }

  /// Quadrature estimate of the surface area.
  double area() const;
};

SurfaceDiscretization discretize(const PatchAtlas& atlas, std::size_t n_u, std::size_t n_v);

}  // namespace rpbie
