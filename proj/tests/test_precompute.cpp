#include <doctest.h>

#include <cmath>
#include <memory>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <omp.h>

#include "rpbie/precompute.hpp"
#include "rpbie/quadrature.hpp"

using namespace rpbie;

namespace {

/// The square [-1,1]^2 at height z, shifted by (cx, cy).
class FlatSquare : public SurfaceMap {
 public:
  FlatSquare(double cx = 0.0, double cy = 0.0, double z = 0.0) : c_(cx, cy, z) {}
  SurfacePoint eval(double u, double v) const override {
    return {c_ + Vec3(u, v, 0.0), Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0)};
  }

 private:
  Vec3 c_;
};

Patch flat_patch(double cx = 0.0, double cy = 0.0) {
  return Patch(std::make_shared<FlatSquare>(cx, cy), EdgeFlag::none, EdgeFlag::none, 4);
}

// int int_{[-1,1]^2} 1 / |(u, v) - (x, y)| du dv in closed form.
double flat_inverse_distance(double x, double y) {
  auto f = [](double a, double b) {
    const double r = std::hypot(a, b);
    return a * std::log(b + r) + b * std::log(a + r);
  };
  return f(1 - x, 1 - y) - f(-1 - x, 1 - y) - f(1 - x, -1 - y) + f(-1 - x, -1 - y);
}

std::vector<cplx> moments(const Patch& patch, const MomentTarget& target, const KernelKind& kind, std::size_t n,
                          std::size_t n_beta) {
  std::vector<cplx> out(n * n);
  compute_weights(patch, std::span(&target, 1), kind, {n, n, n_beta, kDefaultSingularOrder}, out);
  return out;
}

}  // namespace

TEST_CASE("classification: separated patches keep only self nodes") {
  PatchAtlas atlas;
  atlas.closed = false;
  atlas.patches.push_back(flat_patch());
  atlas.patches.push_back(flat_patch(300.0, 0.0));
  const SurfaceDiscretization d = discretize(atlas, 6, 6);
  const NearFieldPlan plan = classify_near(d, 1.0);
  for (std::size_t q = 0; q < 2; ++q) {
    REQUIRE(plan.targets[q].size() == 36);
    for (const NearTarget& nt : plan.targets[q]) {
      CHECK(nt.self);
      CHECK(d.patch_of(nt.node) == q);
    }
  }
  const NearFieldPlan all = classify_near(d, 1e6);
  CHECK(all.targets[0].size() == 72);
  CHECK(all.targets[1].size() == 72);
  CHECK(all.num_pairs() == 144);
  CHECK_THROWS_AS(classify_near(d, 0.0), ConfigError);
}

TEST_CASE("classification on the sphere matches a brute-force distance check") {
  const SurfaceDiscretization d = discretize(make_sphere_atlas(1.0, 1), 8, 8);
  const double delta = 0.5;
  const NearFieldPlan plan = classify_near(d, delta);
  for (std::size_t q = 0; q < d.num_patches(); ++q) {
    std::vector<bool> expect(d.num_nodes(), false);
    const double thr = delta * d.atlas.patches[q].diameter();
    for (std::size_t l = 0; l < d.num_nodes(); ++l) {
      if (d.patch_of(l) == q) {
        expect[l] = true;
        continue;
      }
      for (std::size_t m = d.offset(q); m < d.offset(q) + 64; ++m)
        if ((d.points[l] - d.points[m]).norm() < thr) expect[l] = true;
    }
    std::vector<bool> got(d.num_nodes(), false);
    std::vector<bool> neighbour_hit(d.num_patches(), false);
    for (const NearTarget& nt : plan.targets[q]) {
      got[nt.node] = true;
      neighbour_hit[d.patch_of(nt.node)] = true;
    }
    CHECK(got == expect);
    // The four edge-adjacent faces contribute nodes; the opposite face does not.
    int hit = 0;
    for (std::size_t p = 0; p < d.num_patches(); ++p) hit += (p != q && neighbour_hit[p]);
    CHECK(hit == 4);
  }
  // Reverse index consistency.
  for (std::size_t l = 0; l < d.num_nodes(); ++l)
    for (std::size_t k = plan.node_begin[l]; k < plan.node_begin[l + 1]; ++k)
      CHECK(plan.targets[plan.node_patch[k]][plan.node_slot[k]].node == l);
}

TEST_CASE("closest-point projection") {
  const Patch flat = flat_patch();
  const Projection pf = project_point(flat, Vec3(0.3, -0.2, 0.5));
  CHECK(std::abs(pf.s - 0.3) < 1e-10);
  CHECK(std::abs(pf.t + 0.2) < 1e-10);
  CHECK(std::abs(pf.distance - 0.5) < 1e-12);

  const PatchAtlas sphere = make_sphere_atlas(1.0, 1);
  const SurfaceDiscretization d = discretize(sphere, 6, 6);
  for (std::size_t l = 0; l < d.num_nodes(); l += 7) {
    const Patch& p = sphere.patches[d.patch_of(l)];
    const Projection on = project_point(p, d.points[l]);
    CHECK(std::abs(on.s - d.s[l]) < 1e-10);
    CHECK(std::abs(on.t - d.t[l]) < 1e-10);
    CHECK(on.distance < 1e-10);
    const Projection out = project_point(p, 2.0 * d.points[l]);
    CHECK(std::abs(out.s - d.s[l]) < 1e-10);
    CHECK(std::abs(out.t - d.t[l]) < 1e-10);
    CHECK(std::abs(out.distance - 1.0) < 1e-12);
  }

  // A point beside an edge of a graded cube face projects onto the edge itself.
  const PatchAtlas cube = make_cube_atlas(2.0, 4);
  const Patch& face = cube.patches[0];
  const Vec3 c = face.point_at(1.0, 0.2);
  const Vec3 along = (c - face.point_at(0.5, 0.2)).normalized();
  const Projection pe = project_point(face, c + 0.3 * along + 0.1 * face.sample(0.5, 0.2).normal);
  CHECK(pe.s == 1.0);
  CHECK((face.point_at(pe.s, pe.t) - c).norm() < 1e-9);
}

TEST_CASE("interior projections are stationary points of the distance") {
  const PatchAtlas sphere = make_sphere_atlas(1.0, 2);
  const Patch& p = sphere.patches[5];
  for (const Vec3& dir : {Vec3(0.2, 0.1, 1.0), Vec3(-0.1, 0.3, 1.0), Vec3(0.05, -0.02, 1.0)}) {
    const Vec3 target = p.point_at(0.1, -0.3) + 0.2 * dir.normalized();
    const Projection pr = project_point(p, target);
    if (std::abs(pr.s) == 1.0 || std::abs(pr.t) == 1.0) continue;
    const PatchSample smp = p.sample(pr.s, pr.t);
    const SurfacePoint sp = p.eval(smp.u, smp.v);
    const Vec3 diff = sp.x - target;
    CHECK(std::abs(diff.dot(sp.xu)) < 1e-6 * diff.norm() * sp.xu.norm());
    CHECK(std::abs(diff.dot(sp.xv)) < 1e-6 * diff.norm() * sp.xv.norm());
  }
}

TEST_CASE("flat-panel Laplace moment against closed form and adaptive quadrature") {
  const Patch flat = flat_patch();
  const KernelKind laplace{Formulation::SingleLayer, 0.0};
  const double exact = 2.0 * std::log(1.0 + std::sqrt(2.0)) / pi;
  CHECK(std::abs(exact - flat_inverse_distance(0.0, 0.0) / (4.0 * pi)) < 1e-15);

  const auto beta = moments(flat, {Vec3(0, 0, 0), 0.0, 0.0}, laplace, 6, 200);
  CHECK(std::abs(beta[0] - exact) < 1e-8 * exact);

  // beta_{n,0} at an off-centre target: inner integral over v in closed form,
  // outer by tanh-sinh split at the singular abscissa.
  boost::math::quadrature::tanh_sinh<double> quad;
  const double x0 = 0.35, y0 = -0.6;
  const auto off = moments(flat, {Vec3(x0, y0, 0), x0, y0}, laplace, 6, 200);
  CHECK(std::abs(off[0] - flat_inverse_distance(x0, y0) / (4.0 * pi)) < 1e-8 * std::abs(off[0]));
  for (std::size_t n = 0; n < 6; ++n) {
    auto f = [&](double u) {
      const double a = std::abs(u - x0);
      return cheb_eval(n, u) * (std::asinh((1 - y0) / a) + std::asinh((1 + y0) / a)) / (4.0 * pi);
    };
    const double ref = quad.integrate(f, -1.0, x0, 1e-14) + quad.integrate(f, x0, 1.0, 1e-14);
    CHECK_MESSAGE(std::abs(off[n] - ref) < 1e-8 * std::abs(off[0]), "n=" << n << " beta=" << off[n] << " ref=" << ref);
  }
}

TEST_CASE("odd moments vanish for a centred target on a flat patch") {
  const Patch flat = flat_patch();
  for (double k : {0.0, 3.0}) {
    const auto beta = moments(flat, {Vec3(0, 0, 0), 0.0, 0.0}, {Formulation::SingleLayer, k}, 6, 80);
    for (std::size_t m = 0; m < 6; ++m)
      for (std::size_t n = 1; n < 6; n += 2) {
        CHECK(std::abs(beta[n + 6 * m]) < 1e-12);
        CHECK(std::abs(beta[m + 6 * n]) < 1e-12);
      }
  }
}

TEST_CASE("moments for a distant target agree with the plain tensor rule") {
  const PatchAtlas sphere = make_sphere_atlas(1.0, 1);
  const Patch& p = sphere.patches[2];
  const Vec3 r = 3.0 * p.point_at(0.2, 0.1);
  const std::size_t n = 6;
  for (Formulation f : {Formulation::SingleLayer, Formulation::CombinedField}) {
    const KernelKind kind{f, 2.0};
    const auto beta = moments(p, {r, 0.2, 0.1}, kind, n, 60);
    const FejerRule rule(60);
    std::vector<cplx> ref(n * n, 0.0);
    for (std::size_t j = 0; j < rule.size(); ++j)
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const PatchSample sm = p.sample(rule.nodes[i], rule.nodes[j]);
        const cplx kv = kernel_eval(kind, r, sm.x, sm.normal) * sm.jacobian * rule.weights[i] * rule.weights[j];
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t a = 0; a < n; ++a)
            ref[a + n * b] += kv * cheb_eval(a, rule.nodes[i]) * cheb_eval(b, rule.nodes[j]);
      }
    for (std::size_t c = 0; c < n * n; ++c) CHECK(std::abs(beta[c] - ref[c]) < 1e-10 * std::abs(ref[0]));
  }
}

TEST_CASE("self moments converge as n_beta grows") {
  const PatchAtlas sphere = make_sphere_atlas(1.0, 1);
  const Patch& p = sphere.patches[0];
  const MomentTarget tgt{p.point_at(0.3, -0.45), 0.3, -0.45};
  const KernelKind kind{Formulation::CombinedField, 2.0 * pi};
  const auto ref = moments(p, tgt, kind, 8, 200);
  double prev = 1.0;
  for (std::size_t nb : {20u, 40u, 80u}) {
    const auto b = moments(p, tgt, kind, 8, nb);
    double err = 0.0;
    for (std::size_t c = 0; c < b.size(); ++c) err = std::max(err, std::abs(b[c] - ref[c]));
    err /= std::abs(ref[0]);
    CHECK_MESSAGE(err < 0.1 * prev, "n_beta=" << nb << " err=" << err);
    prev = err;
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("precompute_weights: layout, finiteness, thread independence") {
  const SurfaceDiscretization d = discretize(make_sphere_atlas(1.0, 1), 6, 6);
  const NearFieldPlan plan = build_near_plan(d, 0.5);
  const KernelKind kind{Formulation::CombinedField, 3.0};
  omp_set_num_threads(1);
  const PrecomputedWeights w1 = precompute_weights(d, plan, kind, {40, kDefaultSingularOrder});
  omp_set_num_threads(4);
  const PrecomputedWeights w4 = precompute_weights(d, plan, kind, {40, kDefaultSingularOrder});
  CHECK(w1.data().size() == plan.num_pairs() * 36);
  CHECK(w1.num_patches() == 6);
  for (std::size_t q = 0; q < 6; ++q) CHECK(w1.num_blocks(q) == plan.targets[q].size());
  bool finite = true, same = true;
  for (std::size_t c = 0; c < w1.data().size(); ++c) {
    finite = finite && std::isfinite(w1.data()[c].real()) && std::isfinite(w1.data()[c].imag());
    same = same && w1.data()[c] == w4.data()[c];
  }
  CHECK(finite);
  CHECK(same);

  // A block equals compute_weights for the same target.
  const NearTarget& nt = plan.targets[3][5];
  const auto direct = moments(d.atlas.patches[3], {d.points[nt.node], nt.s, nt.t}, kind, 6, 40);
  const auto blk = w1.block(3, 5);
  for (std::size_t c = 0; c < 36; ++c) CHECK(blk[c] == direct[c]);
}
