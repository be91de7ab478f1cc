#pragma once

#include <rouf/error.hpp>

#include <json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rouf::sampling {

/// The first 64 primes; dimension j of a Halton batch uses kPrimes[j].
inline constexpr std::array<std::uint64_t, 64> kPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

enum class Kind { kHalton, kLattice, kGrid, kUniform };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::kHalton: return "halton";
    case Kind::kLattice: return "lattice";
    case Kind::kGrid: return "grid";
    case Kind::kUniform: return "uniform";
  }
  return "?";
}

/// Everything needed to regenerate a batch bit for bit.
struct Provenance {
  Kind kind = Kind::kUniform;
  std::size_t m = 0;            // point count (grid: points per dimension)
  std::size_t n = 0;            // dimension
  std::size_t start = 0;        // halton: index of the first point; lattice: shift index
  std::vector<double> alphas;   // lattice generators
  std::uint64_t seed = 0;       // uniform

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Points in [0,1]^n stored row-major.
class SampleBatch {
 public:
  SampleBatch(std::size_t dim, std::vector<double> coords, Provenance provenance)
      : dim_(dim), coords_(std::move(coords)), provenance_(std::move(provenance)) {
    if (dim_ == 0) throw ConfigError("sample dimension must be >= 1");
    if (coords_.size() % dim_ != 0) throw ConfigError("coordinate count is not a multiple of the dimension");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  std::span<const double> coords() const noexcept { return coords_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  friend bool operator==(const SampleBatch&, const SampleBatch&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  Provenance provenance_;
};

/// Digit reversal of `i` in base `base`, as a fraction in [0,1).
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  std::uint64_t rev = 0;
  std::uint64_t denom = 1;
  std::uint64_t rest = i;
  while (rest > 0 && denom <= kExact / base) {
    rev = rev * base + rest % base;
    denom *= base;
    rest /= base;
  }
  double r = static_cast<double>(rev) / static_cast<double>(denom);
  // Digits beyond 2^53 resolution only matter for astronomically large indices.
  double scale = 1.0 / static_cast<double>(denom);
  while (rest > 0) {
    scale /= static_cast<double>(base);
    r += static_cast<double>(rest % base) * scale;
    rest /= base;
  }
  return r;
}

/// Halton points with indices start .. start+m-1 (the classic sequence starts at 1).
inline SampleBatch halton(std::size_t m, std::size_t n, std::size_t start = 1) {
  if (n == 0) throw ConfigError("halton: dimension must be >= 1");
  if (n > kPrimes.size()) throw ConfigError("halton: dimension " + std::to_string(n) + " exceeds the prime table (64)");
  std::vector<double> coords;
  coords.reserve(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) coords.push_back(radical_inverse(start + i, kPrimes[j]));
  }
  return SampleBatch(n, std::move(coords), Provenance{Kind::kHalton, m, n, start, {}, 0});
}

inline std::vector<double> default_lattice_alphas(std::size_t n) {
  if (n == 0) throw ConfigError("lattice: dimension must be >= 1");
  if (n - 1 > kPrimes.size()) throw ConfigError("lattice: no default generators beyond 65 dimensions");
  std::vector<double> a;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double r = std::sqrt(static_cast<double>(kPrimes[j]));
    a.push_back(r - std::floor(r));
  }
  return a;
}

/// Rank-1 lattice: point i = (i/m, {i*a_1}, ..., {i*a_(n-1)}) for i = 0 .. m-1.
/// A nonzero `shift` adds Halton point number `shift` to every point modulo 1
/// (Cranley-Patterson rotation), giving fresh lattice batches for iterative refinement.
inline SampleBatch lattice(std::size_t m, std::size_t n, std::vector<double> alphas = {}, std::size_t shift = 0) {
  if (n == 0) throw ConfigError("lattice: dimension must be >= 1");
  if (m == 0) throw ConfigError("lattice: m must be >= 1");
  if (alphas.empty()) alphas = default_lattice_alphas(n);
  if (alphas.size() != n - 1) {
    throw ConfigError("lattice: expected " + std::to_string(n - 1) + " generators, got " + std::to_string(alphas.size()));
  }
  for (double a : alphas) {
    if (!(a > 0 && a < 1)) throw ConfigError("lattice: generators must lie in (0,1)");
  }
  if (shift > 0 && n > kPrimes.size()) throw ConfigError("lattice: shifted batches support at most 64 dimensions");
  std::vector<double> offset(n, 0.0);
  if (shift > 0) {
    for (std::size_t j = 0; j < n; ++j) offset[j] = radical_inverse(shift, kPrimes[j]);
  }
  auto wrap = [](double x) { return x - std::floor(x); };
  std::vector<double> coords;
  coords.reserve(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    coords.push_back(wrap(static_cast<double>(i) / static_cast<double>(m) + offset[0]));
    for (std::size_t j = 1; j < n; ++j) coords.push_back(wrap(wrap(static_cast<double>(i) * alphas[j - 1]) + offset[j]));
  }
  return SampleBatch(n, std::move(coords), Provenance{Kind::kLattice, m, n, shift, std::move(alphas), 0});
}

inline constexpr std::size_t kMaxGridPoints = 10'000'000;

/// Cell centres (2i+1)/(2k) of a k^n grid; the first dimension varies slowest.
inline SampleBatch grid(std::size_t k, std::size_t n) {
  if (n == 0) throw ConfigError("grid: dimension must be >= 1");
  if (k == 0) throw ConfigError("grid: k must be >= 1");
  std::size_t total = 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (total > kMaxGridPoints / k) throw SizeError("grid: k^n exceeds 10^7 points");
    total *= k;
  }
  std::vector<double> coords(total * n);
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t r = 0; r < total; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      coords[r * n + j] = static_cast<double>(2 * digit[j] + 1) / static_cast<double>(2 * k);
    }
    for (std::size_t j = n; j-- > 0;) {
      if (++digit[j] < k) break;
      digit[j] = 0;
    }
  }
  return SampleBatch(n, std::move(coords), Provenance{Kind::kGrid, k, n, 0, {}, 0});
}

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline SampleBatch uniform_random(std::size_t m, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("uniform_random: dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> coords(m * n);
  for (double& c : coords) c = unit_double(rng);
  return SampleBatch(n, std::move(coords), Provenance{Kind::kUniform, m, n, 0, {}, seed});
}

inline SampleBatch regenerate(const Provenance& p) {
  switch (p.kind) {
    case Kind::kHalton: return halton(p.m, p.n, p.start);
    case Kind::kLattice: return lattice(p.m, p.n, p.alphas, p.start);
    case Kind::kGrid: return grid(p.m, p.n);
    case Kind::kUniform: return uniform_random(p.m, p.n, p.seed);
  }
  throw ConfigError("unknown sampler kind");
}

/// Mixes a base seed with a stream index (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline nlohmann::json provenance_json(const Provenance& p) {
  nlohmann::json j{{"sampler", kind_name(p.kind)}, {"n", p.n}};
  switch (p.kind) {
    case Kind::kHalton:
      j["m"] = p.m;
      j["start"] = p.start;
      j["primes"] = std::vector<std::uint64_t>(kPrimes.begin(), kPrimes.begin() + static_cast<std::ptrdiff_t>(p.n));
      break;
    case Kind::kLattice:
      j["m"] = p.m;
      j["alphas"] = p.alphas;
      j["shift"] = p.start;
      break;
    case Kind::kGrid: j["k"] = p.m; break;
    case Kind::kUniform:
      j["m"] = p.m;
      j["seed"] = p.seed;
      break;
  }
  return j;
}

/// One point per row, n columns, shortest round-trip decimal formatting.
inline std::string batch_to_csv(const SampleBatch& batch) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto p = batch.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof(buf), p[j]);
      if (j) out += ',';
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace rouf::sampling
