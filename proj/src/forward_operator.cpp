#include "rpbie/forward_operator.hpp"

#include <sstream>

#include "rpbie/kernel_sums.hpp"

namespace rpbie {

Density build_density(const SurfaceDiscretization& disc, std::span<const cplx> phi) {
  if (phi.size() != disc.num_nodes()) {
    std::ostringstream msg;
    msg << "density has " << phi.size() << " values, discretization has " << disc.num_nodes() << " nodes";
    throw ConfigError(msg.str());
  }
  Density d;
  d.phi.assign(phi.begin(), phi.end());
  d.psi.resize(phi.size());
  for (std::size_t l = 0; l < phi.size(); ++l) d.psi[l] = phi[l] * (disc.dwu[l] * disc.dwv[l]);
  d.coeffs.resize(disc.num_patches());
  const std::size_t npp = disc.nodes_per_patch();
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < disc.num_patches(); ++q) {
    d.coeffs[q] = cheb_transform_2d(std::span(d.psi).subspan(disc.offset(q), npp), disc.n_u, disc.n_v);
  }
  return d;
}

std::vector<cplx> apply_far(const NearFieldPlan& plan, const SurfaceDiscretization& disc, const KernelKind& kind,
                            const Density& density) {
  const std::size_t total = disc.num_nodes();
  const std::size_t npp = disc.nodes_per_patch();
  const std::size_t npatch = disc.num_patches();

  // Source strengths J w_u' w_v' omega omega phi.
  std::vector<double> wr(total), wi(total);
  for (std::size_t l = 0; l < total; ++l) {
    const cplx s = disc.weight[l] * density.phi[l];
    wr[l] = s.real();
    wi[l] = s.imag();
  }
  const SourceArrays src(disc);

  std::vector<cplx> out(total, cplx(0.0));
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t l = 0; l < total; ++l) {
    const Vec3& r = disc.points[l];
    std::size_t near = plan.node_begin[l];
    const std::size_t near_end = plan.node_begin[l + 1];
    cplx acc = 0.0;
    // Fixed ascending patch order keeps the reduction deterministic.
    for (std::size_t q = 0; q < npatch; ++q) {
      if (near < near_end && plan.node_patch[near] == q) {
        ++near;
        continue;
      }
      acc += kernel_sum(kind.formulation, kind.k, r, src, wr.data(), wi.data(), q * npp, (q + 1) * npp);
    }
    out[l] = acc;
  }
  return out;
}

void apply_near(const NearFieldPlan& plan, const PrecomputedWeights& weights, const Density& density,
                std::span<cplx> out) {
  const std::size_t total = out.size();
  if (plan.node_begin.size() != total + 1) throw ConfigError("near plan does not match the output size");
  if (weights.num_patches() != plan.targets.size()) throw ConfigError("weights do not match the near plan");
  const std::size_t block = weights.block_size();
  for (std::size_t l = 0; l < total; ++l) {
    for (std::size_t k = plan.node_begin[l]; k < plan.node_begin[l + 1]; ++k) {
      if (plan.node_slot[k] >= weights.num_blocks(plan.node_patch[k])) {
        std::ostringstream msg;
        msg << "missing moment weights for patch " << plan.node_patch[k] << ", node " << l;
        throw NumericalError(msg.str());
      }
    }
  }
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t l = 0; l < total; ++l) {
    cplx acc = 0.0;
    for (std::size_t k = plan.node_begin[l]; k < plan.node_begin[l + 1]; ++k) {
      const std::size_t q = plan.node_patch[k], slot = plan.node_slot[k];
      const auto beta = weights.block(q, slot);
      const auto a = density.coeffs[q].data();
      cplx part = 0.0;
      for (std::size_t c = 0; c < block; ++c) part += a[c] * beta[c];
      acc += part;
    }
    out[l] += acc;
  }
}

std::vector<cplx> apply_operator(const KernelKind& kind, const SurfaceDiscretization& disc,
                                 const NearFieldPlan& plan, const PrecomputedWeights& weights,
                                 std::span<const cplx> phi) {
  const Density density = build_density(disc, phi);
  std::vector<cplx> out = apply_far(plan, disc, kind, density);
  apply_near(plan, weights, density, out);
  if (kind.formulation == Formulation::CombinedField) {
    for (std::size_t l = 0; l < out.size(); ++l) out[l] += 0.5 * phi[l];
  }
  return out;
}

OperatorData prepare_operator(const PatchAtlas& atlas, std::size_t n, const KernelKind& kind, double delta,
                              const WeightParams& params) {
  OperatorData op;
  op.disc = discretize(atlas, n, n);
  op.plan = build_near_plan(op.disc, delta);
  op.weights = precompute_weights(op.disc, op.plan, kind, params);
  op.kind = kind;
  return op;
}

}  // namespace rpbie
