#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "rpbie/weight_cache.hpp"

using namespace rpbie;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  SurfaceDiscretization disc = discretize(make_sphere_atlas(1.0, 1), 5, 5);
  KernelKind kind{Formulation::CombinedField, 2.5};
  WeightParams params{30, kDefaultSingularOrder};
  double delta = 0.5;
  NearFieldPlan plan = build_near_plan(disc, delta);
  PrecomputedWeights weights = precompute_weights(disc, plan, kind, params);
  CacheKey key = make_cache_key(disc, kind, delta, params);
  fs::path path = fs::temp_directory_path() / "rpbie_test_weight_cache.bin";

  Fixture() { cache_store(path, key, plan, weights); }
  ~Fixture() { fs::remove(path); }
};

std::vector<char> read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_all(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

}  // namespace

TEST_CASE("store then load is bitwise exact") {
  Fixture f;
  const CachedOperator c = cache_load(f.path, f.key);
  REQUIRE(c.weights.data().size() == f.weights.data().size());
  CHECK(std::memcmp(c.weights.data().data(), f.weights.data().data(), f.weights.data().size_bytes()) == 0);
  CHECK(c.weights.patch_begin() == f.weights.patch_begin());
  CHECK(c.weights.n_u() == 5);
  CHECK(c.plan.projected);
  REQUIRE(c.plan.targets.size() == f.plan.targets.size());
  for (std::size_t q = 0; q < c.plan.targets.size(); ++q) {
    REQUIRE(c.plan.targets[q].size() == f.plan.targets[q].size());
    for (std::size_t i = 0; i < c.plan.targets[q].size(); ++i) {
      const NearTarget &a = c.plan.targets[q][i], &b = f.plan.targets[q][i];
      CHECK(a.node == b.node);
      CHECK(a.s == b.s);
      CHECK(a.t == b.t);
      CHECK(a.distance == b.distance);
      CHECK(a.self == b.self);
    }
  }
  CHECK(c.plan.node_begin == f.plan.node_begin);
  CHECK(cache_peek_key(f.path).hash() == f.key.hash());
}

TEST_CASE("a changed key is rejected and the fields are named") {
  Fixture f;
  CacheKey other = f.key;
  other.k = 3.0;
  try {
    cache_load(f.path, other);
    FAIL("expected a mismatch");
  } catch (const CacheMismatchError& e) {
    REQUIRE(e.fields().size() == 1);
    CHECK(e.fields()[0].rfind("k ", 0) == 0);
    CHECK(std::string(e.what()).find("2.5") != std::string::npos);
  }
  other.n_beta = 31;
  other.formulation = Formulation::SingleLayer;
  try {
    cache_load(f.path, other);
    FAIL("expected a mismatch");
  } catch (const CacheMismatchError& e) {
    CHECK(e.fields().size() == 3);
  }
  const CacheKey moved = make_cache_key(discretize(make_sphere_atlas(2.0, 1), 5, 5), f.kind, f.delta, f.params);
  CHECK_THROWS_AS(cache_load(f.path, moved), CacheMismatchError);
}

TEST_CASE("corruption is detected") {
  Fixture f;
  const std::vector<char> good = read_all(f.path);

  std::vector<char> flipped = good;
  flipped[flipped.size() - 40] ^= 0x10;  // inside the weight payload
  write_all(f.path, flipped);
  CHECK_THROWS_AS(cache_load(f.path, f.key), CacheCorruptError);

  std::vector<char> key_hit = good;
  key_hit[20] ^= 0x01;  // inside the key block
  write_all(f.path, key_hit);
  CHECK_THROWS_AS(cache_load(f.path, f.key), CacheError);

  write_all(f.path, std::vector<char>(good.begin(), good.begin() + std::ptrdiff_t(good.size() / 2)));
  CHECK_THROWS_AS(cache_load(f.path, f.key), CacheCorruptError);

  std::vector<char> magic = good;
  magic[0] = 'X';
  write_all(f.path, magic);
  CHECK_THROWS_AS(cache_load(f.path, f.key), CacheCorruptError);

  CHECK_THROWS_AS(cache_load(fs::temp_directory_path() / "rpbie_missing_cache.bin", f.key), CacheError);
}
