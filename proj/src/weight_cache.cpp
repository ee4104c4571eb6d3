#include "rpbie/weight_cache.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace rpbie {

namespace {

constexpr std::array<char, 8> kMagic = {'R', 'P', 'B', 'I', 'E', 'W', 'C', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kByteOrderMarker = 0x01020304;

template <class T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw CacheError("cannot open cache file for writing: " + path.string());
  }

  void bytes(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data), std::streamsize(size));
    if (checksumming_) crc_ = crc32(crc_, static_cast<const Bytef*>(data), uInt(size));
  }

  template <class T>
  void put(T value) {
    const T le = to_little(value);
    bytes(&le, sizeof(le));
  }

  void start_checksum() {
    checksumming_ = true;
    crc_ = crc32(0L, Z_NULL, 0);
  }
  std::uint32_t checksum() const { return std::uint32_t(crc_); }

  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw CacheError("failed writing cache file " + path.string());
  }

 private:
  std::ofstream out_;
  bool checksumming_ = false;
  uLong crc_ = 0;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw CacheError("cannot open cache file " + path.string());
  }

  void bytes(void* data, std::size_t size) {
    in_.read(static_cast<char*>(data), std::streamsize(size));
    if (std::size_t(in_.gcount()) != size) throw CacheCorruptError("truncated cache file " + path_.string());
    if (checksumming_) crc_ = crc32(crc_, static_cast<const Bytef*>(data), uInt(size));
  }

  template <class T>
  T get() {
    T value;
    bytes(&value, sizeof(value));
    return to_little(value);
  }

  void start_checksum() {
    checksumming_ = true;
    crc_ = crc32(0L, Z_NULL, 0);
  }
  void stop_checksum() { checksumming_ = false; }
  std::uint32_t checksum() const { return std::uint32_t(crc_); }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
  bool checksumming_ = false;
  uLong crc_ = 0;
};

template <class Sink>
void put_key(Sink& sink, const CacheKey& key) {
  sink.put(key.atlas_fingerprint);
  sink.put(key.n_u);
  sink.put(key.n_v);
  sink.put(key.n_beta);
  sink.put(key.k);
  sink.put(std::uint32_t(key.formulation == Formulation::SingleLayer ? 1 : 0));
  sink.put(key.delta);
  sink.put(key.p_sing);
}

struct KeyBytes {
  std::vector<unsigned char> data;
  template <class T>
  void put(T value) {
    const T le = to_little(value);
    const auto* p = reinterpret_cast<const unsigned char*>(&le);
    data.insert(data.end(), p, p + sizeof(T));
  }
};

CacheKey read_key(Reader& in) {
  CacheKey key;
  key.atlas_fingerprint = in.get<std::uint32_t>();
  key.n_u = in.get<std::uint32_t>();
  key.n_v = in.get<std::uint32_t>();
  key.n_beta = in.get<std::uint32_t>();
  key.k = in.get<double>();
  const auto f = in.get<std::uint32_t>();
  if (f > 1) throw CacheCorruptError("unknown formulation code in cache key");
  key.formulation = f == 1 ? Formulation::SingleLayer : Formulation::CombinedField;
  key.delta = in.get<double>();
  key.p_sing = in.get<std::int32_t>();
  return key;
}

CacheKey read_header(Reader& in) {
  std::array<char, 8> magic{};
  in.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw CacheCorruptError("not a weight cache file (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) throw CacheCorruptError("unsupported cache version " + std::to_string(version));
  if (in.get<std::uint32_t>() != kByteOrderMarker) throw CacheCorruptError("bad byte-order marker");
  const CacheKey key = read_key(in);
  if (in.get<std::uint32_t>() != key.hash()) throw CacheCorruptError("cache key checksum failure");
  return key;
}

const char* formulation_name(Formulation f) {
  return f == Formulation::SingleLayer ? "single" : "combined";
}

}  // namespace

std::uint32_t CacheKey::hash() const {
  KeyBytes kb;
  put_key(kb, *this);
  return std::uint32_t(crc32(crc32(0L, Z_NULL, 0), kb.data.data(), uInt(kb.data.size())));
}

std::vector<std::string> CacheKey::differences(const CacheKey& o) const {
  std::vector<std::string> out;
  auto cmp = [&out](const char* name, const auto& a, const auto& b) {
    if (!(a == b)) {
      std::ostringstream s;
      s.precision(17);
      s << name << " (cached " << a << ", requested " << b << ")";
      out.push_back(s.str());
    }
  };
  cmp("atlas", atlas_fingerprint, o.atlas_fingerprint);
  cmp("n_u", n_u, o.n_u);
  cmp("n_v", n_v, o.n_v);
  cmp("n_beta", n_beta, o.n_beta);
  cmp("k", k, o.k);
  cmp("formulation", std::string(formulation_name(formulation)), std::string(formulation_name(o.formulation)));
  cmp("delta", delta, o.delta);
  cmp("p_sing", p_sing, o.p_sing);
  return out;
}

CacheKey make_cache_key(const SurfaceDiscretization& disc, const KernelKind& kind, double delta,
                        const WeightParams& params) {
  CacheKey key;
  key.atlas_fingerprint = atlas_fingerprint(disc.atlas);
  key.n_u = std::uint32_t(disc.n_u);
  key.n_v = std::uint32_t(disc.n_v);
  key.n_beta = std::uint32_t(params.n_beta);
  key.k = kind.k;
  key.formulation = kind.formulation;
  key.delta = delta;
  key.p_sing = params.p_sing;
  return key;
}

void cache_store(const std::filesystem::path& path, const CacheKey& key, const NearFieldPlan& plan,
                 const PrecomputedWeights& weights) {
  Writer out(path);
  out.bytes(kMagic.data(), kMagic.size());
  out.put(kVersion);
  out.put(kByteOrderMarker);
  put_key(out, key);
  out.put(key.hash());

  out.start_checksum();
  out.put(std::uint64_t(plan.targets.size()));
  out.put(std::uint64_t(plan.node_begin.empty() ? 0 : plan.node_begin.size() - 1));
  for (const auto& list : plan.targets) {
    out.put(std::uint64_t(list.size()));
    for (const NearTarget& nt : list) {
      out.put(nt.node);
      out.put(nt.s);
      out.put(nt.t);
      out.put(nt.distance);
      out.put(std::uint8_t(nt.self ? 1 : 0));
    }
  }
  const auto data = weights.data();
  out.put(std::uint64_t(data.size()));
  if constexpr (std::endian::native == std::endian::little) {
    out.bytes(data.data(), data.size() * sizeof(cplx));
  } else {
    for (const cplx& c : data) {
      out.put(c.real());
      out.put(c.imag());
    }
  }
  const std::uint32_t crc = out.checksum();
  out.put(crc);
  out.finish(path);
}

CacheKey cache_peek_key(const std::filesystem::path& path) {
  Reader in(path);
  return read_header(in);
}

CachedOperator cache_load(const std::filesystem::path& path, const CacheKey& expected) {
  Reader in(path);
  const CacheKey stored = read_header(in);
  const auto diff = stored.differences(expected);
  if (!diff.empty()) {
    std::ostringstream msg;
    msg << "weight cache " << path.string() << " was built for different parameters:";
    for (const auto& d : diff) msg << "\n  " << d;
    throw CacheMismatchError(msg.str(), diff);
  }

  in.start_checksum();
  CachedOperator result;
  NearFieldPlan& plan = result.plan;
  plan.delta = stored.delta;
  const auto npatch = in.get<std::uint64_t>();
  const auto nnodes = in.get<std::uint64_t>();
  if (npatch > (1u << 26) || nnodes > (1ull << 34)) throw CacheCorruptError("implausible cache dimensions");
  plan.targets.resize(npatch);
  std::vector<std::size_t> begin(npatch + 1, 0);
  for (std::size_t q = 0; q < npatch; ++q) {
    const auto count = in.get<std::uint64_t>();
    if (count > nnodes) throw CacheCorruptError("implausible near-set size");
    auto& list = plan.targets[q];
    list.resize(count);
    for (NearTarget& nt : list) {
      nt.node = in.get<std::uint32_t>();
      nt.s = in.get<double>();
      nt.t = in.get<double>();
      nt.distance = in.get<double>();
      nt.self = in.get<std::uint8_t>() != 0;
      if (nt.node >= nnodes) throw CacheCorruptError("near target index out of range");
    }
    begin[q + 1] = begin[q] + count;
  }
  const auto nweights = in.get<std::uint64_t>();
  const std::size_t block = std::size_t(stored.n_u) * stored.n_v;
  if (nweights != begin.back() * block) throw CacheCorruptError("weight count does not match the plan");
  std::vector<cplx> data(nweights);
  if constexpr (std::endian::native == std::endian::little) {
    in.bytes(data.data(), data.size() * sizeof(cplx));
  } else {
    for (cplx& c : data) {
      const double re = in.get<double>();
      const double im = in.get<double>();
      c = cplx(re, im);
    }
  }
  in.stop_checksum();
  const std::uint32_t computed = in.checksum();
  if (in.get<std::uint32_t>() != computed) throw CacheCorruptError("cache payload checksum failure");

  plan.projected = true;
  plan.build_reverse_index(nnodes);
  result.weights = PrecomputedWeights::from_raw(stored.n_u, stored.n_v, std::move(begin), std::move(data));
  return result;
}

}  // namespace rpbie
