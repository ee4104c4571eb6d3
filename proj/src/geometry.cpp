#include "rpbie/geometry.hpp"

#include <cmath>
#include <sstream>

#include <zlib.h>

namespace rpbie {

namespace {

// Orthonormal frames (e1, e2, e3) with e1 x e2 = e3 pointing out of each cube face.
const std::array<std::array<Vec3, 3>, 6>& cube_frames() {
  static const std::array<std::array<Vec3, 3>, 6> frames = {{
      {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()},
      {Vec3::UnitY(), Vec3::UnitX(), -Vec3::UnitZ()},
      {Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitX()},
      {Vec3::UnitZ(), Vec3::UnitY(), -Vec3::UnitX()},
      {Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()},
      {Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitY()},
  }};
  return frames;
}

class SphereFaceMap final : public SurfaceMap {
 public:
  SphereFaceMap(double radius, const std::array<Vec3, 3>& frame)
      : radius_(radius), e1_(frame[0]), e2_(frame[1]), e3_(frame[2]) {}

  SurfacePoint eval(double u, double v) const override { return at(std::tan(0.25 * pi * u), std::tan(0.25 * pi * v)); }

  void eval_grid(std::span<const double> u, std::span<const double> v, std::span<SurfacePoint> out) const override {
    std::vector<double> tu(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) tu[i] = std::tan(0.25 * pi * u[i]);
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double b = std::tan(0.25 * pi * v[j]);
      for (std::size_t i = 0; i < u.size(); ++i) out[i + u.size() * j] = at(tu[i], b);
    }
  }

 private:
  SurfacePoint at(double a, double b) const {
    const Vec3 p = a * e1_ + b * e2_ + e3_;
    const double inv_r = 1.0 / p.norm();
    const Vec3 xh = p * inv_r;
    const Vec3 pu = (0.25 * pi * (1.0 + a * a)) * e1_;
    const Vec3 pv = (0.25 * pi * (1.0 + b * b)) * e2_;
    return {radius_ * xh, (radius_ * inv_r) * (pu - xh * xh.dot(pu)),
            (radius_ * inv_r) * (pv - xh * xh.dot(pv))};
  }

  double radius_;
  Vec3 e1_, e2_, e3_;
};

class FlatFaceMap final : public SurfaceMap {
 public:
  FlatFaceMap(double half, const std::array<Vec3, 3>& frame)
      : h_(half), e1_(frame[0]), e2_(frame[1]), e3_(frame[2]) {}

  SurfacePoint eval(double u, double v) const override {
    return {h_ * (u * e1_ + v * e2_ + e3_), h_ * e1_, h_ * e2_};
  }

 private:
  double h_;
  Vec3 e1_, e2_, e3_;
};

class DiskCenterMap final : public SurfaceMap {
 public:
  explicit DiskCenterMap(double half) : a_(half) {}
  SurfacePoint eval(double u, double v) const override {
    return {Vec3(a_ * u, a_ * v, 0.0), Vec3(a_, 0.0, 0.0), Vec3(0.0, a_, 0.0)};
  }

 private:
  double a_;
};

// Quadrilateral between one side of the central square (u = -1) and a quarter
// of the rim (u = +1), linearly blended in u; v runs counterclockwise.
class DiskSectorMap final : public SurfaceMap {
 public:
  DiskSectorMap(double radius, double half, double angle)
      : r_(radius), a_(half), c_(std::cos(angle)), s_(std::sin(angle)) {}

  SurfacePoint eval(double u, double v) const override {
    const double phi = 0.25 * pi * v;
    const double lo = 0.5 * (1.0 - u), hi = 0.5 * (1.0 + u);
    const double ix = a_, iy = a_ * v;
    const double ox = r_ * std::cos(phi), oy = r_ * std::sin(phi);
    const double x = lo * ix + hi * ox, y = lo * iy + hi * oy;
    const double xu = 0.5 * (ox - ix), yu = 0.5 * (oy - iy);
    const double xv = hi * (-0.25 * pi * oy), yv = lo * a_ + hi * (0.25 * pi * ox);
    return {rotate(x, y), rotate(xu, yu), rotate(xv, yv)};
  }

 private:
  Vec3 rotate(double x, double y) const { return Vec3(c_ * x - s_ * y, s_ * x + c_ * y, 0.0); }

  double r_, a_, c_, s_;
};

bool flags_low(EdgeFlag f) { return f == EdgeFlag::both_ends || f == EdgeFlag::low_end_only; }
bool flags_high(EdgeFlag f) { return f == EdgeFlag::both_ends || f == EdgeFlag::high_end_only; }

EdgeFlag make_flag(bool low, bool high) {
  if (low && high) return EdgeFlag::both_ends;
  if (low) return EdgeFlag::low_end_only;
  if (high) return EdgeFlag::high_end_only;
  return EdgeFlag::none;
}

void renumber(PatchAtlas& atlas) {
  for (std::size_t q = 0; q < atlas.patches.size(); ++q) atlas.patches[q].id = int(q);
}

}  // namespace

Patch::Patch(std::shared_ptr<const SurfaceMap> map, EdgeFlag flag_u, EdgeFlag flag_v, int cov_order_p,
             ParamBox box)
    : map_(std::move(map)), flag_u_(flag_u), flag_v_(flag_v), p_(cov_order_p), box_(box) {
  if ((flag_u_ != EdgeFlag::none || flag_v_ != EdgeFlag::none) && p_ < 2) {
    throw ConfigError("edge-flagged patch needs a grading order p >= 2, got " + std::to_string(p_));
  }
}

void SurfaceMap::eval_grid(std::span<const double> u, std::span<const double> v,
                           std::span<SurfacePoint> out) const {
  for (std::size_t j = 0; j < v.size(); ++j)
    for (std::size_t i = 0; i < u.size(); ++i) out[i + u.size() * j] = eval(u[i], v[j]);
}

void Patch::eval_grid(std::span<const double> u, std::span<const double> v, std::span<SurfacePoint> out) const {
  if (out.size() != u.size() * v.size()) throw GeometryError("eval_grid output has the wrong size");
  const double su = 0.5 * (box_.u1 - box_.u0), sv = 0.5 * (box_.v1 - box_.v0);
  std::vector<double> uu(u.size()), vv(v.size());
  for (std::size_t i = 0; i < u.size(); ++i) uu[i] = box_.u0 + (u[i] + 1.0) * su;
  for (std::size_t j = 0; j < v.size(); ++j) vv[j] = box_.v0 + (v[j] + 1.0) * sv;
  map_->eval_grid(uu, vv, out);
  for (SurfacePoint& sp : out) {
    sp.xu *= su;
    sp.xv *= sv;
  }
}

SurfacePoint Patch::eval(double u, double v) const {
  const double su = 0.5 * (box_.u1 - box_.u0), sv = 0.5 * (box_.v1 - box_.v0);
  const double uu = box_.u0 + (u + 1.0) * su;
  const double vv = box_.v0 + (v + 1.0) * sv;
  SurfacePoint sp = map_->eval(uu, vv);
  sp.xu *= su;
  sp.xv *= sv;
  return sp;
}

PatchSample Patch::sample(double s, double t) const {
  const MapValue eu = edge_map(flag_u_, p_, s);
  const MapValue ev = edge_map(flag_v_, p_, t);
  const SurfacePoint sp = eval(eu.value, ev.value);
  const Vec3 c = sp.xu.cross(sp.xv);
  const double jac = c.norm();
  return {sp.x, c / jac, jac, eu.value, ev.value, eu.deriv, ev.deriv};
}

Vec3 Patch::point_at(double s, double t) const {
  return eval(edge_map(flag_u_, p_, s).value, edge_map(flag_v_, p_, t).value).x;
}

std::array<Vec3, 4> Patch::corners() const {
  return {eval(-1, -1).x, eval(1, -1).x, eval(1, 1).x, eval(-1, 1).x};
}

double Patch::diameter() const {
  const auto c = corners();
  double d = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) d = std::max(d, (c[a] - c[b]).norm());
  return d;
}

Patch Patch::with_flags(EdgeFlag flag_u, EdgeFlag flag_v, int p) const {
  Patch out(map_, flag_u, flag_v, p, box_);
  out.id = id;
  return out;
}

Patch Patch::sub_patch(const ParamBox& sub, EdgeFlag flag_u, EdgeFlag flag_v) const {
  const double su = 0.5 * (box_.u1 - box_.u0), sv = 0.5 * (box_.v1 - box_.v0);
  ParamBox b;
  b.u0 = box_.u0 + (sub.u0 + 1.0) * su;
  b.u1 = box_.u0 + (sub.u1 + 1.0) * su;
  b.v0 = box_.v0 + (sub.v0 + 1.0) * sv;
  b.v1 = box_.v0 + (sub.v1 + 1.0) * sv;
  return Patch(map_, flag_u, flag_v, p_, b);
}

PatchAtlas make_sphere_atlas(double radius, int splits) {
  if (!(radius > 0.0) || splits < 1) throw ConfigError("sphere needs radius > 0 and splits >= 1");
  PatchAtlas atlas;
  atlas.closed = true;
  for (const auto& frame : cube_frames()) {
    atlas.patches.emplace_back(std::make_shared<SphereFaceMap>(radius, frame), EdgeFlag::none,
                               EdgeFlag::none, kDefaultEdgeOrder);
  }
  renumber(atlas);
  return split_atlas(atlas, splits);
}

PatchAtlas make_cube_atlas(double side, int p_edge) {
  if (!(side > 0.0)) throw ConfigError("cube needs side > 0");
  const EdgeFlag f = (p_edge > 0) ? EdgeFlag::both_ends : EdgeFlag::none;
  PatchAtlas atlas;
  atlas.closed = true;
  for (const auto& frame : cube_frames()) {
    atlas.patches.emplace_back(std::make_shared<FlatFaceMap>(0.5 * side, frame), f, f,
                               p_edge > 0 ? p_edge : kDefaultEdgeOrder);
  }
  renumber(atlas);
  return atlas;
}

PatchAtlas make_disk_atlas(double radius, int p_edge) {
  if (!(radius > 0.0)) throw ConfigError("disk needs radius > 0");
  const double half = 0.5 * radius;
  const int p = p_edge > 0 ? p_edge : kDefaultEdgeOrder;
  const EdgeFlag rim = (p_edge > 0) ? EdgeFlag::high_end_only : EdgeFlag::none;
  PatchAtlas atlas;
  atlas.closed = false;
  atlas.patches.emplace_back(std::make_shared<DiskCenterMap>(half), EdgeFlag::none, EdgeFlag::none, p);
  for (int k = 0; k < 4; ++k) {
    atlas.patches.emplace_back(std::make_shared<DiskSectorMap>(radius, half, 0.5 * pi * k), rim,
                               EdgeFlag::none, p);
  }
  renumber(atlas);
  return atlas;
}

PatchAtlas split_atlas(const PatchAtlas& atlas, int s) {
  if (s < 1) throw ConfigError("split factor must be >= 1");
  if (s == 1) return atlas;
  PatchAtlas out;
  out.closed = atlas.closed;
  out.patches.reserve(atlas.size() * std::size_t(s * s));
  const double h = 2.0 / s;
  for (const Patch& p : atlas.patches) {
    for (int b = 0; b < s; ++b) {
      for (int a = 0; a < s; ++a) {
        const ParamBox sub{-1.0 + a * h, (a + 1 == s) ? 1.0 : -1.0 + (a + 1) * h,
                           -1.0 + b * h, (b + 1 == s) ? 1.0 : -1.0 + (b + 1) * h};
        const EdgeFlag fu = make_flag(a == 0 && flags_low(p.flag_u()), a + 1 == s && flags_high(p.flag_u()));
        const EdgeFlag fv = make_flag(b == 0 && flags_low(p.flag_v()), b + 1 == s && flags_high(p.flag_v()));
        out.patches.push_back(p.sub_patch(sub, fu, fv));
      }
    }
  }
  renumber(out);
  return out;
}

PatchAtlas with_edge_order(const PatchAtlas& atlas, int p) {
  PatchAtlas out;
  out.closed = atlas.closed;
  for (const Patch& patch : atlas.patches) {
    if (p <= 0) {
      out.patches.push_back(patch.with_flags(EdgeFlag::none, EdgeFlag::none, patch.cov_order()));
    } else {
      out.patches.push_back(patch.with_flags(patch.flag_u(), patch.flag_v(), p));
    }
  }
  renumber(out);
  return out;
}

std::uint32_t atlas_fingerprint(const PatchAtlas& atlas) {
  uLong crc = crc32(0L, Z_NULL, 0);
  auto feed = [&crc](const auto& value) {
    crc = crc32(crc, reinterpret_cast<const Bytef*>(&value), sizeof(value));
  };
  feed(std::uint8_t(atlas.closed));
  feed(std::uint64_t(atlas.size()));
  constexpr double probe[3] = {-0.7, 0.1, 0.8};
  for (const Patch& p : atlas.patches) {
    feed(std::uint8_t(p.flag_u()));
    feed(std::uint8_t(p.flag_v()));
    feed(std::int32_t(p.cov_order()));
    for (double t : probe) {
      for (double s : probe) {
        const Vec3 x = p.point_at(s, t);
        feed(x.x());
        feed(x.y());
        feed(x.z());
      }
    }
  }
  return std::uint32_t(crc);
}

double SurfaceDiscretization::area() const {
  double a = 0.0;
  for (double w : weight) a += w;
  return a;
}

SurfaceDiscretization discretize(const PatchAtlas& atlas, std::size_t n_u, std::size_t n_v) {
  if (n_u < 2 || n_v < 2) throw ConfigError("discretization needs at least 2 nodes per direction");
  SurfaceDiscretization d;
  d.atlas = atlas;
  d.n_u = n_u;
  d.n_v = n_v;
  d.rule_u = FejerRule(n_u);
  d.rule_v = FejerRule(n_v);

  const std::size_t total = atlas.size() * n_u * n_v;
  for (auto* vec : {&d.s, &d.t, &d.u, &d.v, &d.jacobian, &d.dwu, &d.dwv, &d.weight}) vec->resize(total);
  d.points.resize(total);
  d.normals.resize(total);

  std::size_t l = 0;
  for (std::size_t q = 0; q < atlas.size(); ++q) {
    const Patch& patch = atlas.patches[q];
    for (std::size_t j = 0; j < n_v; ++j) {
      for (std::size_t i = 0; i < n_u; ++i, ++l) {
        const double s = d.rule_u.nodes[i], t = d.rule_v.nodes[j];
        const PatchSample ps = patch.sample(s, t);
        if (!(ps.jacobian > 0.0) || !std::isfinite(ps.jacobian)) {
          std::ostringstream msg;
          msg << "non-positive Jacobian on patch " << q << " at (s, t) = (" << s << ", " << t << ")";
          throw GeometryError(msg.str());
        }
        d.s[l] = s;
        d.t[l] = t;
        d.u[l] = ps.u;
        d.v[l] = ps.v;
        d.points[l] = ps.x;
        d.normals[l] = ps.normal;
        d.jacobian[l] = ps.jacobian;
        d.dwu[l] = ps.dwu;
        d.dwv[l] = ps.dwv;
        d.weight[l] = ps.jacobian * ps.dwu * ps.dwv * d.rule_u.weights[i] * d.rule_v.weights[j];
      }
    }
  }
  return d;
}

}  // namespace rpbie
