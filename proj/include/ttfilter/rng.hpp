#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "ttfilter/types.hpp"

namespace tt {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Named, independent random streams derived from one seed. The same
/// (seed, index, name) triple always yields the same generator.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  const std::uint64_t s = splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL) ^ h);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

/// Vector of independent standard normal draws.
inline Vec standard_normal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

}  // namespace tt
