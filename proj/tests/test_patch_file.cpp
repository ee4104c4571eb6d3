#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>

#include "rpbie/patch_file.hpp"

using namespace rpbie;

namespace {

std::string what_of(auto&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("one bilinear unit square") {
  const std::string text = R"(# unit square in the xy plane
surface open
patch 1 1
  0 0 0   1 0 0
  0 1 0   1 1 0
  none none 4
)";
  const PatchAtlas a = parse_patch_text(text);
  CHECK(a.size() == 1);
  CHECK_FALSE(a.closed);
  CHECK(std::abs(discretize(a, 4, 4).area() - 1.0) < 1e-14);
  const Vec3 c = a.patches[0].point_at(0.0, 0.0);
  CHECK((c - Vec3(0.5, 0.5, 0.0)).norm() < 1e-15);
  CHECK(a.patches[0].eval(0.2, -0.4).xu.cross(a.patches[0].eval(0.2, -0.4).xv).z() > 0.0);
}

TEST_CASE("bilinear faces reproduce the cube atlas") {
  const PatchAtlas cube = make_cube_atlas(2.0);
  std::vector<PatchRecord> records;
  for (const Patch& p : cube.patches) {
    PatchRecord r;
    r.net.degree_u = r.net.degree_v = 1;
    for (double v : {-1.0, 1.0})
      for (double u : {-1.0, 1.0}) r.net.points.push_back(p.eval(u, v).x);
    r.flag_u = p.flag_u();
    r.flag_v = p.flag_v();
    r.p = p.cov_order();
    records.push_back(r);
  }
  const std::string text = format_patch_text(records, true);
  const PatchAtlas parsed = parse_patch_text(text);
  REQUIRE(parsed.size() == 6);
  CHECK(parsed.closed);
  for (std::size_t q = 0; q < 6; ++q) {
    CHECK(parsed.patches[q].flag_u() == EdgeFlag::both_ends);
    CHECK(parsed.patches[q].cov_order() == cube.patches[q].cov_order());
    for (double s = -0.95; s < 1.0; s += 0.15) {
      for (double t = -0.9; t < 1.0; t += 0.3) {
        CHECK((parsed.patches[q].point_at(s, t) - cube.patches[q].point_at(s, t)).norm() < 1e-14);
        CHECK(parsed.patches[q].sample(s, t).normal.dot(cube.patches[q].sample(s, t).normal) ==
              doctest::Approx(1.0).epsilon(1e-14));
      }
    }
  }
  CHECK(std::abs(discretize(parsed, 12, 12).area() - discretize(cube, 12, 12).area()) < 1e-12);
  CHECK(std::abs(discretize(with_edge_order(parsed, 0), 12, 12).area() - 24.0) < 1e-12);
}

TEST_CASE("biquadratic patch: exact polynomial derivatives") {
  BezierControlNet net;
  net.degree_u = 2;
  net.degree_v = 2;
  for (int j = 0; j <= 2; ++j)
    for (int i = 0; i <= 2; ++i) net.points.emplace_back(i * 0.5, j * 0.5, (i == 1 && j == 1) ? 0.4 : 0.0);
  const auto map = make_bezier_map(net);
  const double h = 1e-5;
  for (double u : {-0.6, 0.1, 0.8}) {
    for (double v : {-0.3, 0.45}) {
      const SurfacePoint sp = map->eval(u, v);
      const Vec3 fu = (map->eval(u + h, v).x - map->eval(u - h, v).x) / (2 * h);
      const Vec3 fv = (map->eval(u, v + h).x - map->eval(u, v - h).x) / (2 * h);
      CHECK((fu - sp.xu).norm() < 1e-9);
      CHECK((fv - sp.xv).norm() < 1e-9);
    }
  }
}

TEST_CASE("parse errors name the offending patch") {
  const std::string short_points = R"(surface open
patch 1 1
  0 0 0  1 0 0  0 1 0  1 1 0
  none none 4
patch 1 1
  0 0 1  1 0 1  0 1 1
  none none 4
)";
  const std::string msg = what_of([&] { parse_patch_text(short_points, "bad.patch"); });
  CHECK(msg.find("patch 1") != std::string::npos);
  CHECK_THROWS_AS(parse_patch_text(short_points), ConfigError);

  CHECK_THROWS_AS(parse_patch_text("surface sideways\n"), ConfigError);
  CHECK_THROWS_AS(parse_patch_text("surface open\npatch 1 1\n0 0 0 1 0 0 0 1 0 1 1 0\nsideways none 4\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_patch_text("surface open\n"), ConfigError);
  CHECK_THROWS_AS(parse_patch_text("surface open\npatch 1 1\n0 0 0 1 0 0 0 1 0 1 1 x\nnone none 4\n"),
                  ConfigError);
}

TEST_CASE("degenerate patches are rejected") {
  // All control points on a line: zero Jacobian everywhere.
  const std::string line = R"(surface open
patch 1 1
  0 0 0  1 0 0  2 0 0  3 0 0
  none none 4
)";
  CHECK_THROWS_AS(parse_patch_text(line), GeometryError);
}

TEST_CASE("load_patch_file reads from disk") {
  const std::string path = "test_patch_file_tmp.patch";
  {
    std::ofstream out(path);
    out << "surface open  # trailing comment\npatch 1 1\n0 0 0 2 0 0\n0 2 0 2 2 0\nlow none 2\n";
  }
  const PatchAtlas a = load_patch_file(path);
  CHECK(a.size() == 1);
  CHECK(a.patches[0].flag_u() == EdgeFlag::low_end_only);
  CHECK(a.patches[0].cov_order() == 2);
  CHECK(std::abs(discretize(a, 32, 32).area() - 4.0) < 1e-12);
  std::remove(path.c_str());
  CHECK_THROWS(load_patch_file("does/not/exist.patch"));
}
