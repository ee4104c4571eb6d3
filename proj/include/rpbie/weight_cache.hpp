#pragma once

// Binary persistence of a projected near-field plan and its moment weights.
//
// Layout (all integers and doubles little-endian, doubles IEEE-754):
//   char[8]  magic "RPBIEWC\0"
//   u32      format version (1)
//   u32      byte-order marker 0x01020304
//   key      u32 atlas fingerprint, u32 n_u, u32 n_v, u32 n_beta, f64 k,
//            u32 formulation (0 combined, 1 single), f64 delta, i32 p_sing
//   u32      CRC-32 of the key bytes
//   u64      number of patches M, u64 number of nodes
//   M times: u64 count, then count records {u32 node, f64 s, f64 t, f64 distance, u8 self}
//   u64      number of complex weights W, then W pairs (f64 re, f64 im)
//   u32      CRC-32 of every byte after the key CRC up to here
//
// Weight blocks follow the plan order: patch by patch, target by target, each
// block n_u * n_v values with the u index fastest.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpbie/kernel.hpp"
#include "rpbie/precompute.hpp"

namespace rpbie {

struct CacheKey {
  std::uint32_t atlas_fingerprint = 0;
  std::uint32_t n_u = 0;
  std::uint32_t n_v = 0;
  std::uint32_t n_beta = 0;
  double k = 0.0;
  Formulation formulation = Formulation::CombinedField;
  double delta = 0.0;
  std::int32_t p_sing = 0;

  std::uint32_t hash() const;
  /// Names of the fields in which this key differs from other, with both values.
  std::vector<std::string> differences(const CacheKey& other) const;
};

CacheKey make_cache_key(const SurfaceDiscretization& disc, const KernelKind& kind, double delta,
                        const WeightParams& params);

class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The stored key differs from the requested one.
class CacheMismatchError : public CacheError {
 public:
  CacheMismatchError(const std::string& what, std::vector<std::string> fields)
      : CacheError(what), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

/// Truncated file, bad magic or checksum failure.
class CacheCorruptError : public CacheError {
 public:
  using CacheError::CacheError;
};

struct CachedOperator {
  NearFieldPlan plan;
  PrecomputedWeights weights;
};

void cache_store(const std::filesystem::path& path, const CacheKey& key, const NearFieldPlan& plan,
                 const PrecomputedWeights& weights);

/// Loads and verifies a cache file against the expected key.
CachedOperator cache_load(const std::filesystem::path& path, const CacheKey& expected);

/// Reads only the key of a cache file.
CacheKey cache_peek_key(const std::filesystem::path& path);

}  // namespace rpbie
