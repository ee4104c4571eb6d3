#pragma once

// Matrix-free application of the discretized boundary integral operator.
//
// For a target node l and source patch q the contribution I^q(r_l) is either
//   far:  sum_ij K(r_l, x_ij) J_ij w_u'(s_i) w_v'(t_j) phi_ij omega_i omega_j
//   near: sum_nm a^q_{n,m} beta^q_{n,m,l}
// where a^q are the Chebyshev coefficients of the edge-resolved density
// psi = w_u' w_v' phi on patch q.

#include <span>
#include <vector>

#include "rpbie/geometry.hpp"
#include "rpbie/kernel.hpp"
#include "rpbie/precompute.hpp"
#include "rpbie/quadrature.hpp"

namespace rpbie {

struct Density {
  std::vector<cplx> phi;                ///< nodal values
  std::vector<cplx> psi;                ///< w_u' w_v' phi at the nodes
  std::vector<ChebCoeffGrid> coeffs;    ///< per patch, expansion of psi
};

Density build_density(const SurfaceDiscretization& disc, std::span<const cplx> phi);

/// Far interactions at every node: patches whose near set excludes the node.
std::vector<cplx> apply_far(const NearFieldPlan& plan, const SurfaceDiscretization& disc, const KernelKind& kind,
                            const Density& density);

/// Adds the near contractions sum_nm a_nm beta_nm into out (size num_nodes).
void apply_near(const NearFieldPlan& plan, const PrecomputedWeights& weights, const Density& density,
                std::span<cplx> out);

/// Operator data bundled for repeated application.
struct OperatorData {
  SurfaceDiscretization disc;
  NearFieldPlan plan;
  PrecomputedWeights weights;
  KernelKind kind;
};

/// CombinedField: phi/2 + (D - i k S) phi.  SingleLayer: S phi.
std::vector<cplx> apply_operator(const KernelKind& kind, const SurfaceDiscretization& disc,
                                 const NearFieldPlan& plan, const PrecomputedWeights& weights,
                                 std::span<const cplx> phi);

inline std::vector<cplx> apply_operator(const OperatorData& op, std::span<const cplx> phi) {
  return apply_operator(op.kind, op.disc, op.plan, op.weights, phi);
}

/// Discretization, projected near plan and moments for one kernel.
OperatorData prepare_operator(const PatchAtlas& atlas, std::size_t n, const KernelKind& kind, double delta,
                              const WeightParams& params);

}  // namespace rpbie
