#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qvipower {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed from a master seed and up to two
/// stream indices. Parallel and serial schedules that hand out substreams by
/// index therefore see identical draws.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0xd6e8feb86659fd93ULL;
  h ^= splitmix64(s);
  s ^= b * 0xa2f79b7f1c5297cdULL;
  h ^= splitmix64(s);
  return h;
}

/// Deterministic generator with explicit variate transforms. Distribution
/// classes from <random> are not bit-stable across standard libraries, so the
/// uniform and exponential transforms are spelled out here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Exponential with unit mean (the law of |H|^2 for H ~ CN(0,1)).
  double exponential() { return -std::log1p(-uniform01()); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qvipower
