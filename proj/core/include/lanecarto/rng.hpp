#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lanecarto {

// mt19937_64 with hand-rolled uniform draws. std::uniform_real_distribution is
// implementation-defined, which would break byte-identical reruns across
// standard libraries; the raw-bit mapping below is pinned.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Derive an independent stream for a subtask (stable across runs).
  Rng fork(std::uint64_t salt) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// splitmix64 mix of (seed, salt); the seed of a derived deterministic stream.
inline std::uint64_t fork_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng Rng::fork(std::uint64_t salt) const { return Rng(fork_seed(seed_, salt)); }

// FNV-1a over a byte string; used for config provenance hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace lanecarto
