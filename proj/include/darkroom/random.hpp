#pragma once

#include <cstdint>
#include <random>

namespace darkroom {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stateless per-pixel hash; independent streams per `salt`.
constexpr std::uint64_t pixel_hash(std::uint64_t seed, int x, int y, std::uint64_t salt = 0) {
  std::uint64_t h = splitmix64(seed ^ (salt * 0xd1b54a32d192ed03ull));
  h = splitmix64(h ^ static_cast<std::uint32_t>(x));
  return splitmix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 32));
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// std::uniform_real_distribution is implementation-defined; draw from the
// engine bits directly so sample sets match across toolchains.
inline double uniform01(std::mt19937_64& rng) { return unit_double(rng()); }

}  // namespace darkroom
